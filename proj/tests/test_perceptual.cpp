#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "diagbench/perceptual.hpp"

#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace diagbench;

TEST_CASE("two disjoint rects produce no design errors") {
    const auto doc = builders::doc(400, 300, {builders::rect("a", 10, 10, 50, 50),
                                              builders::rect("b", 200, 10, 50, 50)});
    CHECK(detect_design_errors(doc).count_e == 0.0);
}

TEST_CASE("an off-canvas rect plus an overlapping pair count two errors") {
    const auto doc = builders::doc(
        400, 300,
        {builders::rect("off", -60, 10, 50, 50), // fully outside
         builders::rect("p1", 100, 100, 80, 80), builders::rect("p2", 120, 120, 80, 80)});
    const ErrorReport report = detect_design_errors(doc);
    CHECK(report.count_e == 2.0);
    CHECK(report.errors[0].kind == DesignErrorKind::overlap);
    CHECK(report.errors[1].kind == DesignErrorKind::off_canvas);
}

TEST_CASE("text overflow, duplicates and dangling connectors are each detected") {
    // 30 chars at 12pt estimate 216x14.4 units; the 100x20 box overflows.
    auto overflowing =
        builders::text_box("t", "a very long label that overflows", 10, 10, 100, 20, 12.0);
    const auto doc1 = builders::doc(500, 400, {overflowing});
    const ErrorReport r1 = detect_design_errors(doc1);
    CHECK(r1.count_e == 1.0);
    CHECK(r1.errors[0].kind == DesignErrorKind::text_overflow);

    auto d1 = builders::rect("d1", 10, 10, 40, 40);
    auto d2 = d1;
    d2.id = "d2";
    d2.fill->opacity = 0.5; // translucent: the duplicate rule fires, overlap does not
    const auto doc2 = builders::doc(500, 400, {d1, d2});
    bool has_duplicate = false;
    for (const auto& e : detect_design_errors(doc2).errors)
        has_duplicate |= e.kind == DesignErrorKind::duplicate;
    CHECK(has_duplicate);

    const auto doc3 = builders::doc(
        500, 400,
        {builders::rect("box", 10, 10, 60, 60), builders::connector("c", 72, 40, 300, 300)});
    const ErrorReport r3 = detect_design_errors(doc3);
    CHECK(r3.count_e == 1.0); // start snaps to the box (2 units), the far end dangles
    CHECK(r3.errors[0].kind == DesignErrorKind::dangling_connector);
}

TEST_CASE("a snapped connector between two boxes is clean") {
    const auto doc = builders::doc(
        500, 400,
        {builders::rect("a", 10, 10, 60, 60), builders::rect("b", 200, 200, 60, 60),
         builders::connector("c", 72, 40, 198, 230)});
    CHECK(detect_design_errors(doc).count_e == 0.0);
}

TEST_CASE("adding an element that triggers nothing leaves e unchanged") {
    auto doc = builders::doc(400, 300, {builders::rect("a", 10, 10, 50, 50),
                                        builders::rect("b", 200, 10, 50, 50)});
    const double e0 = detect_design_errors(doc).count_e;
    doc.elements.push_back(builders::rect("c", 10, 200, 30, 30));
    CHECK(detect_design_errors(doc).count_e == e0);
}

namespace {

VectorDocument random_layout(std::mt19937& rng) {
    std::uniform_int_distribution<int> count(2, 10);
    std::uniform_real_distribution<double> pos(-40, 360);
    std::uniform_real_distribution<double> size(5, 120);
    std::uniform_int_distribution<int> kind_pick(0, 3);
    std::uniform_int_distribution<int> opacity_pick(0, 2);
    VectorDocument doc;
    doc.canvas_width = 400;
    doc.canvas_height = 400;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
        DiagramElement el;
        el.id = "e" + std::to_string(i);
        el.z_order = i;
        el.bbox = {pos(rng), pos(rng), size(rng), size(rng)};
        switch (kind_pick(rng)) {
            case 0:
                el.kind = ElementKind::rect;
                el.fill = Fill{{0, 0, 0}, opacity_pick(rng) == 0 ? 0.5 : 1.0};
                break;
            case 1:
                el.kind = ElementKind::ellipse;
                el.fill = Fill{{30, 30, 30}, 1.0};
                break;
            case 2:
                el.kind = ElementKind::connector;
                el.stroke = Stroke{{0, 0, 0}, 1.0};
                break;
            default:
                el.kind = ElementKind::text_box;
                el.text = TextPayload{"label " + std::to_string(i % 4), 10.0, {0, 0, 0},
                                      std::nullopt};
                break;
        }
        doc.elements.push_back(el);
    }
    return doc;
}

} // namespace

TEST_CASE("200 random layouts match the naive all-pairs oracle") {
    std::mt19937 rng(2025);
    for (int trial = 0; trial < 200; ++trial) {
        const VectorDocument doc = random_layout(rng);
        const ErrorReport report = detect_design_errors(doc);
        CHECK(report.count_e == static_cast<double>(oracles::design_error_count_naive(doc)));
    }
}

TEST_CASE("permuting element order never changes e") {
    std::mt19937 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        VectorDocument doc = random_layout(rng);
        const ErrorReport before = detect_design_errors(doc);
        std::shuffle(doc.elements.begin(), doc.elements.end(), rng);
        const ErrorReport after = detect_design_errors(doc);
        CHECK(before.count_e == after.count_e);
        REQUIRE(before.errors.size() == after.errors.size());
        for (std::size_t i = 0; i < before.errors.size(); ++i) {
            CHECK(before.errors[i].kind == after.errors[i].kind);
            CHECK(before.errors[i].element_ids == after.errors[i].element_ids);
        }
    }
}

TEST_CASE("design_score formula cases") {
    CHECK(design_score(0.0) == 1.0);
    CHECK(design_score(2.0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(design_score(0.5) == doctest::Approx(0.5).epsilon(1e-12)); // fractional judge mean
    CHECK_THROWS_AS(design_score(-1.0), Error);
    double prev = 2.0;
    for (double e = 0.0; e < 10.0; e += 0.5) {
        CHECK(design_score(e) < prev);
        prev = design_score(e);
    }
}

TEST_CASE("error reports serialize to json for audit logs") {
    const auto doc = builders::doc(100, 100, {builders::rect("off", -50, 0, 20, 20)});
    const nlohmann::json j = detect_design_errors(doc).to_json();
    CHECK(j["count_e"] == 1.0);
    CHECK(j["errors"][0]["kind"] == "off_canvas");
}

// ---- readability ----

TEST_CASE("a lone black 12pt text on white is readable") {
    const auto doc =
        builders::doc(1024, 1024, {builders::text_box("t", "hello world", 100, 100, 200, 30)});
    const RasterGrid grid = rasterize(doc);
    const ReadabilityReport rep = assess_readability(doc, grid);
    REQUIRE(rep.per_text.size() == 1);
    CHECK(rep.per_text[0].readable);
    CHECK(rep.readable == std::set<std::string>{"hello world"});
}

TEST_CASE("full occlusion by a higher-z opaque rect kills readability") {
    auto t = builders::text_box("t", "hidden", 100, 100, 200, 30, 12.0, {0, 0, 0}, 1);
    auto cover = builders::rect("cover", 90, 90, 220, 50, {10, 10, 10}, 1.0, 5);
    const auto doc = builders::doc(1024, 1024, {t, cover});
    const ReadabilityReport rep = assess_readability(doc, rasterize(doc));
    REQUIRE(rep.per_text.size() == 1);
    CHECK_FALSE(rep.per_text[0].readable);
    CHECK(std::find(rep.per_text[0].reasons.begin(), rep.per_text[0].reasons.end(), "occluded") !=
          rep.per_text[0].reasons.end());
}

TEST_CASE("tiny fonts and low contrast are flagged") {
    auto tiny = builders::text_box("tiny", "small", 10, 10, 50, 8, 4.0); // 4px at scale 1
    auto faint = builders::text_box("faint", "faint", 10, 40, 80, 20, 14.0, {220, 220, 220});
    const auto doc = builders::doc(1024, 1024, {tiny, faint});
    const ReadabilityReport rep = assess_readability(doc, rasterize(doc));
    REQUIRE(rep.per_text.size() == 2);
    CHECK_FALSE(rep.per_text[0].readable);
    CHECK(rep.per_text[0].reasons == std::vector<std::string>{"font_too_small"});
    CHECK_FALSE(rep.per_text[1].readable);
    CHECK(rep.per_text[1].reasons == std::vector<std::string>{"low_contrast"});
}

TEST_CASE("text backed by a dark fill needs a light color") {
    auto panel = builders::rect("panel", 50, 50, 300, 100, {20, 20, 20}, 1.0, 0);
    auto dark = builders::text_box("dark", "dark on dark", 60, 60, 200, 20, 12.0, {0, 0, 0}, 1);
    auto light = builders::text_box("light", "light on dark", 60, 90, 200, 20, 12.0,
                                    {255, 255, 255}, 1);
    const auto doc = builders::doc(1024, 1024, {panel, dark, light});
    const ReadabilityReport rep = assess_readability(doc, rasterize(doc));
    REQUIRE(rep.per_text.size() == 2);
    CHECK_FALSE(rep.per_text[0].readable);
    CHECK(rep.per_text[1].readable);
}

TEST_CASE("a mixed fixture of 10 texts matches the rule-by-rule oracle") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> pos(0, 800);
    std::uniform_int_distribution<int> font(3, 20);
    std::uniform_int_distribution<int> shade(0, 255);
    std::vector<DiagramElement> els;
    els.push_back(builders::rect("bg", 0, 0, 500, 500, {40, 40, 40}, 1.0, 0));
    for (int i = 0; i < 10; ++i) {
        const auto s = static_cast<std::uint8_t>(shade(rng));
        els.push_back(builders::text_box("t" + std::to_string(i), "text " + std::to_string(i),
                                         pos(rng), pos(rng), 150, 25,
                                         static_cast<double>(font(rng)), {s, s, s}, 1));
    }
    els.push_back(builders::rect("top", 200, 200, 400, 300, {0, 0, 0}, 1.0, 9));
    const auto doc = builders::doc(1024, 1024, els);
    const RasterGrid grid = rasterize(doc);
    const ReadabilityReport rep = assess_readability(doc, grid);

    // independent per-rule evaluation
    const double scale = 1.0;
    for (const auto& v : rep.per_text) {
        const DiagramElement* el = nullptr;
        for (const auto& e : doc.elements)
            if (e.text && e.text->content == v.raw && e.bbox.cx() >= 0) {
                el = &e;
                break;
            }
        REQUIRE(el != nullptr);
        const bool size_ok = el->text->font_size * scale >= 6.0;
        double backing = 255.0;
        int best_z = -1000000;
        for (const auto& c : doc.elements) {
            if (!c.fill || c.fill->opacity <= 0.0 || c.z_order > el->z_order) continue;
            if (!c.bbox.contains(el->bbox.cx(), el->bbox.cy())) continue;
            if (c.z_order >= best_z) {
                best_z = c.z_order;
                backing = luminance(c.fill->color);
            }
        }
        const bool contrast_ok =
            std::abs(static_cast<double>(luminance(el->text->color)) - backing) >= 64.0;
        double covered = 0.0;
        for (const auto& c : doc.elements) {
            if (&c == el || !c.fill || c.fill->opacity < 1.0 || c.z_order <= el->z_order) continue;
            covered += intersection_area(c.bbox, el->bbox); // no double cover in this fixture
        }
        const bool occlusion_ok = covered / el->bbox.area() <= 0.30;
        CHECK(v.readable == (size_ok && contrast_ok && occlusion_ok));
    }
}

TEST_CASE("readability_score formula cases") {
    ReadabilityReport rep;
    std::set<std::string> g = {"a", "b", "c", "d", "e"};
    rep.readable = g;
    CHECK(readability_score(rep, g) == 1.0);

    rep.readable = {"a", "b", "c"};
    g = {"a", "b", "c", "d"};
    CHECK(readability_score(rep, g) == doctest::Approx(0.75).epsilon(1e-12));

    CHECK(readability_score(rep, {}) == 1.0);
}
