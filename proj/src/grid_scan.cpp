#include "patchcrf/grid_scan.hpp"

#include <algorithm>

namespace patchcrf {

const char* scan_order_name(ScanOrder order) {
    switch (order) {
        case ScanOrder::Zigzag: return "zigzag";
        case ScanOrder::Hilbert: return "hilbert";
        case ScanOrder::RowPrime: return "rowprime";
        case ScanOrder::RowRaster: return "rowraster";
    }
    return "?";
}

ScanOrder parse_scan_order(const std::string& name) {
    if (name == "zigzag") return ScanOrder::Zigzag;
    if (name == "hilbert") return ScanOrder::Hilbert;
    if (name == "rowprime") return ScanOrder::RowPrime;
    if (name == "rowraster") return ScanOrder::RowRaster;
    throw Error("unknown scan order '" + name +
                "' (expected zigzag|hilbert|rowprime|rowraster)");
}

namespace {

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

CellPath zigzag_path(const GridSpec& g) {
    // Anti-diagonals d = r + c, direction alternating per diagonal.
    // d odd walks down-left (row ascending), d even walks up-right.
    CellPath path;
    path.reserve(g.cell_count());
    const std::size_t dmax = g.rows + g.cols - 2;
    for (std::size_t d = 0; d <= dmax; ++d) {
        const std::size_t rlo = d >= g.cols ? d - g.cols + 1 : 0;
        const std::size_t rhi = std::min(d, g.rows - 1);
        if (d % 2 == 1) {
            for (std::size_t r = rlo; r <= rhi; ++r) path.push_back({r, d - r});
        } else {
            for (std::size_t r = rhi + 1; r-- > rlo;) path.push_back({r, d - r});
        }
    }
    return path;
}

// Standard Hilbert d -> (x, y) walk; base cell visits
// (0,0),(1,0),(1,1),(0,1) in (row, col) terms.
Cell hilbert_cell(std::size_t side, std::size_t d) {
    std::size_t x = 0, y = 0, t = d;
    for (std::size_t s = 1; s < side; s <<= 1) {
        const std::size_t rx = 1 & (t / 2);
        const std::size_t ry = 1 & (t ^ rx);
        if (ry == 0) { // rotate quadrant
            if (rx == 1) {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::swap(x, y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
    }
    return {y, x};
}

CellPath hilbert_path(const GridSpec& g) {
    if (g.rows != g.cols || !is_power_of_two(g.rows))
        throw HilbertGridUnsupported(
            "Hilbert order needs a square power-of-two grid, got " +
            std::to_string(g.rows) + "x" + std::to_string(g.cols));
    CellPath path;
    path.reserve(g.cell_count());
    for (std::size_t d = 0; d < g.cell_count(); ++d)
        path.push_back(hilbert_cell(g.rows, d));
    return path;
}

CellPath row_path(const GridSpec& g, bool snake) {
    CellPath path;
    path.reserve(g.cell_count());
    for (std::size_t r = 0; r < g.rows; ++r) {
        if (snake && r % 2 == 1) {
            for (std::size_t c = g.cols; c-- > 0;) path.push_back({r, c});
        } else {
            for (std::size_t c = 0; c < g.cols; ++c) path.push_back({r, c});
        }
    }
    return path;
}

} // namespace

CellPath scan_sequence(const GridSpec& grid, ScanOrder order) {
    if (grid.rows < 1 || grid.cols < 1) throw Error("grid must be at least 1x1");
    switch (order) {
        case ScanOrder::Zigzag: return zigzag_path(grid);
        case ScanOrder::Hilbert: return hilbert_path(grid);
        case ScanOrder::RowPrime: return row_path(grid, true);
        case ScanOrder::RowRaster: return row_path(grid, false);
    }
    throw Error("invalid scan order");
}

std::vector<PatchRegion> partition_image(std::size_t height, std::size_t width,
                                         const GridSpec& grid) {
    if (height < grid.rows || width < grid.cols)
        throw ImageTooSmall("image " + std::to_string(height) + "x" +
                            std::to_string(width) + " cannot tile a " +
                            std::to_string(grid.rows) + "x" +
                            std::to_string(grid.cols) + " grid");
    std::vector<PatchRegion> regions;
    regions.reserve(grid.cell_count());
    for (std::size_t r = 0; r < grid.rows; ++r) {
        const std::size_t y0 = r * height / grid.rows;
        const std::size_t y1 = (r + 1) * height / grid.rows;
        for (std::size_t c = 0; c < grid.cols; ++c) {
            const std::size_t x0 = c * width / grid.cols;
            const std::size_t x1 = (c + 1) * width / grid.cols;
            regions.push_back({y0, x0, y1 - y0, x1 - x0});
        }
    }
    return regions;
}

std::vector<PatchRegion> order_patches(const std::vector<PatchRegion>& regions,
                                       const CellPath& path, const GridSpec& grid) {
    if (regions.size() != path.size() || regions.size() != grid.cell_count())
        throw LengthMismatch("have " + std::to_string(regions.size()) +
                             " regions for a path of length " +
                             std::to_string(path.size()));
    std::vector<PatchRegion> ordered;
    ordered.reserve(regions.size());
    for (const Cell& cell : path)
        ordered.push_back(regions[cell.row * grid.cols + cell.col]);
    return ordered;
}

} // namespace patchcrf
