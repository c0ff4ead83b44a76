#include "synthetic_dataset.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <unistd.h>

#include "patchcrf/grid_scan.hpp"
#include "patchcrf/rng.hpp"

namespace fs = std::filesystem;

namespace patchcrf::testing {

const char* const kSyntheticClassNames[kSyntheticClassCount] = {"alpha", "beta",
                                                                "gamma"};

namespace {

constexpr std::size_t kImageSize = 64;
constexpr double kWavelength = 8.0;

// Grating orientations of the three texture primitives.
constexpr double kPrimitiveTheta[3] = {0.0, std::numbers::pi / 2.0,
                                       std::numbers::pi / 4.0};

// Distinct 3x3 primitive layouts, one per class.
constexpr int kLayouts[kSyntheticClassCount][9] = {
    {0, 0, 0, 1, 1, 1, 2, 2, 2}, // horizontal bands
    {0, 1, 2, 0, 1, 2, 0, 1, 2}, // vertical bands
    {0, 1, 0, 1, 2, 1, 0, 1, 0}, // checker-like
};

} // namespace

GrayImage synthetic_image(std::size_t class_idx, std::uint64_t seed) {
    Rng rng(seed);
    GrayImage img;
    img.width = kImageSize;
    img.height = kImageSize;
    img.pixels.assign(kImageSize * kImageSize, 0.0);

    const GridSpec grid{3, 3};
    const auto regions = partition_image(kImageSize, kImageSize, grid);
    for (std::size_t cell = 0; cell < regions.size(); ++cell) {
        const int prim = kLayouts[class_idx][cell];
        const double theta = kPrimitiveTheta[prim];
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const auto& reg = regions[cell];
        for (std::size_t r = 0; r < reg.height; ++r) {
            for (std::size_t c = 0; c < reg.width; ++c) {
                const double y = static_cast<double>(reg.row0 + r);
                const double x = static_cast<double>(reg.col0 + c);
                const double t = x * std::cos(theta) + y * std::sin(theta);
                double v = 0.5 + 0.35 * std::sin(2.0 * std::numbers::pi * t /
                                                     kWavelength +
                                                 phase);
                v += 0.03 * rng.gaussian();
                img.at(reg.row0 + r, reg.col0 + c) =
                    std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return img;
}

void generate_synthetic_dataset(const std::string& root, std::size_t per_class,
                                std::uint64_t seed) {
    for (std::size_t c = 0; c < kSyntheticClassCount; ++c) {
        const fs::path dir = fs::path(root) / kSyntheticClassNames[c];
        fs::create_directories(dir);
        for (std::size_t i = 0; i < per_class; ++i) {
            const GrayImage img = synthetic_image(c, sub_seed(seed, c, i));
            const auto bytes = encode_pgm(img);
            char name[32];
            std::snprintf(name, sizeof name, "img_%03zu.pgm", i);
            std::ofstream out(dir / name, std::ios::binary);
            out.write(reinterpret_cast<const char*>(bytes.data()),
                      static_cast<std::streamsize>(bytes.size()));
        }
    }
}

std::string make_temp_dir(const std::string& prefix) {
    static std::atomic<unsigned> counter{0};
    const fs::path dir =
        fs::temp_directory_path() /
        (prefix + "_" + std::to_string(::getpid()) + "_" +
         std::to_string(counter.fetch_add(1)));
    fs::create_directories(dir);
    return dir.string();
}

} // namespace patchcrf::testing
