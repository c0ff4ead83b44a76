#ifndef PATCHCRF_GRID_SCAN_HPP
#define PATCHCRF_GRID_SCAN_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "patchcrf/errors.hpp"

namespace patchcrf {

struct GridSpec {
    std::size_t rows = 1;
    std::size_t cols = 1;

    std::size_t cell_count() const { return rows * cols; }
};

enum class ScanOrder { Zigzag, Hilbert, RowPrime, RowRaster };

const char* scan_order_name(ScanOrder order);
ScanOrder parse_scan_order(const std::string& name); // throws Error

struct Cell {
    std::size_t row = 0;
    std::size_t col = 0;

    bool operator==(const Cell&) const = default;
};

// Ordered visit of every grid cell exactly once.
using CellPath = std::vector<Cell>;

// Rectangular pixel region of an image, [row0, row0+height) x [col0, col0+width).
struct PatchRegion {
    std::size_t row0 = 0;
    std::size_t col0 = 0;
    std::size_t height = 0;
    std::size_t width = 0;

    bool operator==(const PatchRegion&) const = default;
};

// Enumerates the grid under the requested order. Hilbert requires a square
// power-of-two grid and throws HilbertGridUnsupported otherwise.
CellPath scan_sequence(const GridSpec& grid, ScanOrder order);

// Splits [0,H)x[0,W) into a rows x cols tiling with floor boundaries:
// cell (r,c) spans rows [r*H/rows, (r+1)*H/rows). Returned row-major.
// Throws ImageTooSmall if any cell would be empty.
std::vector<PatchRegion> partition_image(std::size_t height, std::size_t width,
                                         const GridSpec& grid);

// Reorders row-major regions so element k is the region at path cell k.
// The regions list must match the path's grid (|regions| = |path|).
std::vector<PatchRegion> order_patches(const std::vector<PatchRegion>& regions,
                                       const CellPath& path, const GridSpec& grid);

} // namespace patchcrf

#endif
