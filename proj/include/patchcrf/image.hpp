#ifndef PATCHCRF_IMAGE_HPP
#define PATCHCRF_IMAGE_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "patchcrf/errors.hpp"
#include "patchcrf/grid_scan.hpp"

namespace patchcrf {

// Row-major grayscale raster with luminance in [0, 1].
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels; // height * width values

    double at(std::size_t row, std::size_t col) const {
        return pixels[row * width + col];
    }
    double& at(std::size_t row, std::size_t col) {
        return pixels[row * width + col];
    }
};

// Decodes Netpbm PGM (P2/P5) and PPM (P3/P6), maxval <= 65535, with
// arbitrary header whitespace and '#' comments. Color is collapsed with
// luma 0.299 R + 0.587 G + 0.114 B; samples are scaled by maxval.
GrayImage decode_image(const std::vector<std::uint8_t>& bytes);

// Convenience wrapper reading a file first; errors carry the path.
GrayImage load_image(const std::string& path);

// Binary PGM (P5), maxval 255, values clamped to [0, 1] and rounded.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

// Bilinear resampling with sample points at pixel centers.
GrayImage resize_bilinear(const GrayImage& img, std::size_t out_w,
                          std::size_t out_h);

// Copies the given region out of the image.
GrayImage crop(const GrayImage& img, const PatchRegion& region);

// True when optional PNG decoding was compiled in (it is not; the CLI
// reports this capability).
constexpr bool png_supported() { return false; }

} // namespace patchcrf

#endif
