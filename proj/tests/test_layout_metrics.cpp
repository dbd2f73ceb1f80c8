#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "diagbench/layout_metrics.hpp"

#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace diagbench;

namespace {

RasterGrid blank_grid(int w, int h, std::uint8_t value = 255) {
    RasterGrid g;
    g.width = w;
    g.height = h;
    g.pixels.assign(static_cast<std::size_t>(w) * h, value);
    return g;
}

void ink_cell(RasterGrid& g, int cell, int cx, int cy) {
    // 20x20 block at the cell center: 400/16384 = 2.4% of a 128px cell, well
    // above the 0.5% ink threshold.
    const int x0 = cx * cell + cell / 2 - 10;
    const int y0 = cy * cell + cell / 2 - 10;
    for (int y = y0; y < y0 + 20; ++y)
        for (int x = x0; x < x0 + 20; ++x) g.at(x, y) = 0;
}

} // namespace

TEST_CASE("a fully inked grid has beta 0") {
    const RasterGrid g = blank_grid(256, 256, 0);
    const BlankEstimate est = estimate_blank(g, 128);
    CHECK(est.beta == 0.0);
    CHECK(est.cells_blank == 0);
    CHECK(est.cells_total == 4);
}

TEST_CASE("an all-white grid has no ink and beta 1") {
    const RasterGrid g = blank_grid(256, 256);
    const BlankEstimate est = estimate_blank(g, 128);
    CHECK(est.no_ink);
    CHECK(est.beta == 1.0);
}

TEST_CASE("a fixture leaving 27% of content cells empty measures beta 0.27") {
    // 3200x1024 raster, 128px cells: 25x8 = 200 cells. 54 blank cells = 0.27.
    RasterGrid g = blank_grid(3200, 1024);
    int blank_left = 54;
    int idx = 0;
    for (int cy = 0; cy < 8; ++cy) {
        for (int cx = 0; cx < 25; ++cx, ++idx) {
            const bool leave_blank = idx >= 50 && idx < 104;
            if (leave_blank && blank_left > 0) {
                --blank_left;
                continue;
            }
            ink_cell(g, 128, cx, cy);
        }
    }
    REQUIRE(blank_left == 0);
    const BlankEstimate est = estimate_blank(g, 128);
    CHECK(est.cells_total == 200);
    CHECK(est.cells_blank == 54);
    CHECK(est.beta == doctest::Approx(0.27).epsilon(1e-12));
    CHECK(blank_score(est.beta) == doctest::Approx(1.0 / 1.54).epsilon(1e-9));
}

TEST_CASE("margins outside the content box do not count as blank") {
    // Ink only in the central 2x2 cells of a 6x6-cell grid; the outer ring is
    // margin and must be excluded entirely.
    RasterGrid g = blank_grid(768, 768);
    ink_cell(g, 128, 2, 2);
    ink_cell(g, 128, 3, 3);
    const BlankEstimate est = estimate_blank(g, 128);
    CHECK(est.cells_total == 4);
    CHECK(est.cells_blank == 2);
    CHECK(est.beta == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("random cell masks match the brute-force classification oracle") {
    std::mt19937 rng(555);
    std::uniform_int_distribution<int> fill(0, 2);
    for (int trial = 0; trial < 30; ++trial) {
        RasterGrid g = blank_grid(512 + 128 * (trial % 3), 512);
        for (int cy = 0; cy < g.height / 64; ++cy)
            for (int cx = 0; cx < g.width / 64; ++cx)
                if (fill(rng) == 0) ink_cell(g, 64, cx, cy);
        const BlankEstimate est = estimate_blank(g, 64);
        const double oracle = oracles::blank_beta_naive(g, 64, default_ink_threshold);
        CHECK(est.beta == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("blank_score formula cases") {
    CHECK(blank_score(0.0) == 1.0);
    CHECK(blank_score(0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(blank_score(0.27) == doctest::Approx(0.6493506493506493).epsilon(1e-9));
    CHECK_THROWS_AS(blank_score(1.5), Error);
    CHECK_THROWS_AS(blank_score(-0.1), Error);
}

TEST_CASE("blank_score is strictly decreasing in beta") {
    double prev = 2.0;
    for (double beta = 0.0; beta <= 1.0001; beta += 0.05) {
        const double s = blank_score(std::min(beta, 1.0));
        CHECK(s < prev);
        prev = s;
    }
}

TEST_CASE("a constant image scores alignment 1") {
    for (const std::uint8_t v : {std::uint8_t{0}, std::uint8_t{128}, std::uint8_t{255}}) {
        const RasterGrid g = blank_grid(64, 64, v);
        CHECK(alignment_score(g) == 1.0);
    }
}

TEST_CASE("the two-band image reproduces the hand-computed variance") {
    RasterGrid g = blank_grid(100, 8, 0);
    for (int y = 4; y < 8; ++y)
        for (int x = 0; x < 100; ++x) g.at(x, y) = 255;
    const ProjectionProfile prof = projection_profile(g);
    CHECK(prof.variance == doctest::Approx(16256.25).epsilon(1e-12));
    CHECK(alignment_score(g) == doctest::Approx(1.0 / 2.625625).epsilon(1e-9));
}

TEST_CASE("regular row spacing scores above clumped rows") {
    // Same five blocks, either spread evenly down the canvas or piled into
    // overlapping bands. Pileups concentrate the row profile's mass into few
    // rows, which is exactly what Var_y penalizes.
    auto bars = [](const std::vector<int>& offsets) {
        RasterGrid g = blank_grid(200, 200);
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            const int x0 = static_cast<int>(i) * 40 + 5;
            for (int y = offsets[i]; y < offsets[i] + 20; ++y)
                for (int x = x0; x < x0 + 30; ++x) g.at(x, y) = 0;
        }
        return g;
    };
    const double aligned = alignment_score(bars({10, 50, 90, 130, 170}));
    const double jittered = alignment_score(bars({60, 65, 70, 75, 80}));
    CHECK(aligned > jittered);
}

TEST_CASE("alignment is invariant under horizontal translation of content") {
    auto make = [](double shift) {
        return rasterize(builders::doc(
                             400, 200,
                             {builders::rect("a", 10 + shift, 20, 60, 30),
                              builders::rect("b", 90 + shift, 90, 40, 40, {90, 90, 90})}),
                         200);
    };
    CHECK(alignment_score(make(0)) == doctest::Approx(alignment_score(make(120))).epsilon(1e-12));
}

TEST_CASE("beta is invariant under uniform document scaling") {
    auto layout = [](double k) {
        return builders::doc(1024 * k, 1024 * k,
                             {builders::rect("a", 64 * k, 64 * k, 256 * k, 256 * k),
                              builders::rect("b", 640 * k, 640 * k, 320 * k, 192 * k)});
    };
    const double b1 = estimate_blank(rasterize(layout(1.0))).beta;
    const double b2 = estimate_blank(rasterize(layout(2.0))).beta;
    CHECK(b1 == doctest::Approx(b2).epsilon(1e-12));
}
