#ifndef PATCHCRF_DATASET_HPP
#define PATCHCRF_DATASET_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "patchcrf/errors.hpp"

namespace patchcrf {

struct DatasetClass {
    std::string name;
    std::vector<std::string> files; // sorted paths
};

struct DatasetManifest {
    std::string root;
    std::vector<DatasetClass> classes; // sorted by name

    std::size_t image_count() const {
        std::size_t n = 0;
        for (const auto& c : classes) n += c.files.size();
        return n;
    }
};

// Scans root/<class>/<image> for .pgm/.ppm/.png files. Classes and files
// come back lexicographically sorted. Classes without images are dropped
// through the warn callback; a dataset with no usable class is an error.
DatasetManifest ingest(const std::string& root,
                       const std::function<void(const std::string&)>& warn = {});

// Seeded per-class shuffle; the first per_class_train images of each class
// go to the train side, the rest to test. Every class must keep at least
// one test image.
std::pair<DatasetManifest, DatasetManifest> split(const DatasetManifest& manifest,
                                                  std::size_t per_class_train,
                                                  std::uint64_t seed);

} // namespace patchcrf

#endif
