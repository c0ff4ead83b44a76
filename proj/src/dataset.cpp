#include "patchcrf/dataset.hpp"

#include <algorithm>
#include <filesystem>

#include "patchcrf/rng.hpp"

namespace fs = std::filesystem;

namespace patchcrf {

namespace {

bool has_image_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext == ".pgm" || ext == ".ppm" || ext == ".png";
}

} // namespace

DatasetManifest ingest(const std::string& root,
                       const std::function<void(const std::string&)>& warn) {
    if (!fs::is_directory(root))
        throw EmptyDataset("dataset root is not a directory: " + root);

    DatasetManifest manifest;
    manifest.root = root;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        DatasetClass cls;
        cls.name = entry.path().filename().string();
        for (const auto& file : fs::directory_iterator(entry.path())) {
            if (file.is_regular_file() && has_image_extension(file.path()))
                cls.files.push_back(file.path().string());
        }
        if (cls.files.empty()) {
            if (warn) warn("class '" + cls.name + "' has no images; dropped");
            continue;
        }
        std::sort(cls.files.begin(), cls.files.end());
        manifest.classes.push_back(std::move(cls));
    }
    std::sort(manifest.classes.begin(), manifest.classes.end(),
              [](const DatasetClass& a, const DatasetClass& b) {
                  return a.name < b.name;
              });
    if (manifest.classes.empty())
        throw EmptyDataset("no classes with images under " + root);
    return manifest;
}

std::pair<DatasetManifest, DatasetManifest> split(const DatasetManifest& manifest,
                                                  std::size_t per_class_train,
                                                  std::uint64_t seed) {
    if (per_class_train < 1) throw Error("per-class train count must be >= 1");
    DatasetManifest train, test;
    train.root = manifest.root;
    test.root = manifest.root;
    for (std::size_t c = 0; c < manifest.classes.size(); ++c) {
        const auto& cls = manifest.classes[c];
        if (cls.files.size() <= per_class_train)
            throw ClassTooSmall("class '" + cls.name + "' has " +
                                std::to_string(cls.files.size()) +
                                " images; need more than " +
                                std::to_string(per_class_train) +
                                " to leave a test side");
        std::vector<std::string> files = cls.files;
        // Fisher-Yates with a per-class sub-seed; std::shuffle's draw
        // sequence is implementation-defined, this one is pinned.
        Rng rng(sub_seed(seed, c));
        for (std::size_t i = files.size() - 1; i > 0; --i)
            std::swap(files[i], files[rng.index(i + 1)]);
        DatasetClass tr{cls.name, {files.begin(),
                                   files.begin() + static_cast<long>(per_class_train)}};
        DatasetClass te{cls.name, {files.begin() + static_cast<long>(per_class_train),
                                   files.end()}};
        train.classes.push_back(std::move(tr));
        test.classes.push_back(std::move(te));
    }
    return {std::move(train), std::move(test)};
}

} // namespace patchcrf
