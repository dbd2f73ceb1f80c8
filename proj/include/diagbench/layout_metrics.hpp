#pragma once

#include <cmath>
#include <vector>

#include "diagbench/raster.hpp"

namespace diagbench {

inline constexpr int default_blank_cell = 128;
inline constexpr double default_ink_threshold = 0.005;

// Invalid-blank estimate: β over the tightest cell-aligned box containing ink.
// Outer margins are excluded; they are always blank and not a design fault.
struct BlankEstimate {
    double beta = 1.0;         // β, invalid-blank ratio in [0,1]
    int grid_cell = default_blank_cell;
    std::size_t cells_total = 0;
    std::size_t cells_blank = 0;
    bool no_ink = false;
};

inline bool is_ink(std::uint8_t v) { return v != 255; }

// Deterministic replacement for the judge-backed blank estimate: overlay a
// cell grid, restrict to the content bounding box, call a cell blank when its
// ink fraction is below ink_threshold.
inline BlankEstimate estimate_blank(const RasterGrid& grid, int cell = default_blank_cell,
                                    double ink_threshold = default_ink_threshold) {
    if (cell <= 0) raise(ErrorKind::out_of_range, "cell size must be positive");
    BlankEstimate est;
    est.grid_cell = cell;

    const int cols = (grid.width + cell - 1) / cell;
    const int rows = (grid.height + cell - 1) / cell;

    std::vector<std::size_t> ink_count(static_cast<std::size_t>(cols) * rows, 0);
    std::vector<std::size_t> pix_count(static_cast<std::size_t>(cols) * rows, 0);
    for (int y = 0; y < grid.height; ++y) {
        const int cy = y / cell;
        for (int x = 0; x < grid.width; ++x) {
            const int cx = x / cell;
            const std::size_t ci = static_cast<std::size_t>(cy) * cols + cx;
            ++pix_count[ci];
            if (is_ink(grid.at(x, y))) ++ink_count[ci];
        }
    }

    int min_cx = cols, min_cy = rows, max_cx = -1, max_cy = -1;
    for (int cy = 0; cy < rows; ++cy) {
        for (int cx = 0; cx < cols; ++cx) {
            if (ink_count[static_cast<std::size_t>(cy) * cols + cx] == 0) continue;
            min_cx = std::min(min_cx, cx);
            min_cy = std::min(min_cy, cy);
            max_cx = std::max(max_cx, cx);
            max_cy = std::max(max_cy, cy);
        }
    }

    if (max_cx < 0) { // nothing painted: β is defined as 1
        est.no_ink = true;
        est.beta = 1.0;
        return est;
    }

    for (int cy = min_cy; cy <= max_cy; ++cy) {
        for (int cx = min_cx; cx <= max_cx; ++cx) {
            const std::size_t ci = static_cast<std::size_t>(cy) * cols + cx;
            ++est.cells_total;
            const double frac =
                static_cast<double>(ink_count[ci]) / static_cast<double>(pix_count[ci]);
            if (frac < ink_threshold) ++est.cells_blank;
        }
    }
    est.beta = static_cast<double>(est.cells_blank) / static_cast<double>(est.cells_total);
    return est;
}

// Blank = 1 / (1 + 2β)
inline double blank_score(double beta) {
    if (beta < 0.0 || beta > 1.0) raise(ErrorKind::out_of_range, "beta must be in [0,1]");
    return 1.0 / (1.0 + 2.0 * beta);
}

// Row mean profile p(y) = (1/W) Σ_x g(x,y) over raw grayscale, plus its
// population variance.
struct ProjectionProfile {
    std::vector<double> p;
    double variance = 0.0;
};

inline ProjectionProfile projection_profile(const RasterGrid& grid) {
    ProjectionProfile prof;
    prof.p.resize(static_cast<std::size_t>(grid.height));
    for (int y = 0; y < grid.height; ++y) {
        double sum = 0.0;
        for (int x = 0; x < grid.width; ++x) sum += grid.at(x, y);
        prof.p[static_cast<std::size_t>(y)] = sum / static_cast<double>(grid.width);
    }
    double mean = 0.0;
    for (const double v : prof.p) mean += v;
    mean /= static_cast<double>(prof.p.size());
    double var = 0.0;
    for (const double v : prof.p) var += (v - mean) * (v - mean);
    prof.variance = var / static_cast<double>(prof.p.size());
    return prof;
}

// Align = 1 / (1 + Var_y[p(y)] / 10^4)
inline double alignment_score(const RasterGrid& grid) {
    if (grid.width <= 0 || grid.height <= 0)
        raise(ErrorKind::out_of_range, "empty raster");
    return 1.0 / (1.0 + projection_profile(grid).variance / 1.0e4);
}

} // namespace diagbench
