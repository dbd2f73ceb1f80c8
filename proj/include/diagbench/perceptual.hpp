#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "diagbench/content_metrics.hpp"
#include "diagbench/raster.hpp"
#include "diagbench/text.hpp"

namespace diagbench {

// Deterministic design-error detector thresholds. The judge-backed mode
// (judge gateway) is the counterpart that delegates these calls to a VLM.
struct DesignErrorThresholds {
    double overlap_fraction = 0.02;  // of the smaller bbox area
    double connector_snap = 5.0;     // document units
    double glyph_aspect = 0.6;       // estimated glyph width, fraction of font size
    double line_height = 1.2;        // estimated text height, fraction of font size
};

enum class DesignErrorKind {
    overlap,
    off_canvas,
    text_overflow,
    duplicate,
    dangling_connector,
};

inline const char* to_string(DesignErrorKind k) {
    switch (k) {
        case DesignErrorKind::overlap: return "overlap";
        case DesignErrorKind::off_canvas: return "off_canvas";
        case DesignErrorKind::text_overflow: return "text_overflow";
        case DesignErrorKind::duplicate: return "duplicate";
        case DesignErrorKind::dangling_connector: return "dangling_connector";
    }
    return "?";
}

struct DesignError {
    DesignErrorKind kind;
    std::vector<std::string> element_ids;
    std::string detail;
};

struct ErrorReport {
    std::vector<DesignError> errors;
    double count_e = 0.0; // len(errors) deterministically; judge-run mean otherwise

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["count_e"] = count_e;
        j["errors"] = nlohmann::json::array();
        for (const auto& e : errors)
            j["errors"].push_back({{"kind", to_string(e.kind)},
                                   {"element_ids", e.element_ids},
                                   {"detail", e.detail}});
        return j;
    }
};

namespace perceptual_detail {

// Estimated text extent in document units; font sizes are treated as document
// units so no raster conversion is needed.
inline std::pair<double, double> text_extent(const TextPayload& t,
                                             const DesignErrorThresholds& th) {
    const std::string trimmed = detail::trim(t.content);
    const double chars = static_cast<double>(utf8::codepoint_count(trimmed));
    return {th.glyph_aspect * t.font_size * chars, th.line_height * t.font_size};
}

inline bool fillable(ElementKind k) {
    return k == ElementKind::rect || k == ElementKind::ellipse || k == ElementKind::text_box;
}

// Area of the union of axis-aligned rectangles via x-slab sweep.
inline double union_area(std::vector<Rect> rects) {
    rects.erase(std::remove_if(rects.begin(), rects.end(),
                               [](const Rect& r) { return r.w <= 0.0 || r.h <= 0.0; }),
                rects.end());
    if (rects.empty()) return 0.0;
    std::vector<double> xs;
    for (const auto& r : rects) {
        xs.push_back(r.x);
        xs.push_back(r.x2());
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double x0 = xs[i], x1 = xs[i + 1];
        std::vector<std::pair<double, double>> spans;
        for (const auto& r : rects)
            if (r.x <= x0 && r.x2() >= x1) spans.emplace_back(r.y, r.y2());
        if (spans.empty()) continue;
        std::sort(spans.begin(), spans.end());
        double covered = 0.0, cur_lo = spans[0].first, cur_hi = spans[0].second;
        for (std::size_t k = 1; k < spans.size(); ++k) {
            if (spans[k].first > cur_hi) {
                covered += cur_hi - cur_lo;
                cur_lo = spans[k].first;
                cur_hi = spans[k].second;
            } else {
                cur_hi = std::max(cur_hi, spans[k].second);
            }
        }
        covered += cur_hi - cur_lo;
        total += covered * (x1 - x0);
    }
    return total;
}

} // namespace perceptual_detail

// Counts visually evident mistakes: overlapping opaque shapes, off-canvas
// placement, text overflowing its container, exact duplicates, and connector
// endpoints that snap to nothing. Order-independent: reports are identical
// under any permutation of the element list (z values preserved).
inline ErrorReport detect_design_errors(const VectorDocument& doc,
                                        const DesignErrorThresholds& th = {}) {
    ErrorReport report;

    // Canonical processing order keeps the report stable under permutation.
    std::vector<const DiagramElement*> els;
    els.reserve(doc.elements.size());
    for (const auto& el : doc.elements) els.push_back(&el);
    std::sort(els.begin(), els.end(),
              [](const DiagramElement* a, const DiagramElement* b) { return a->id < b->id; });

    const Rect canvas{0.0, 0.0, doc.canvas_width, doc.canvas_height};

    for (std::size_t i = 0; i < els.size(); ++i) {
        const DiagramElement& a = *els[i];

        if (a.bbox.x < 0.0 || a.bbox.y < 0.0 || a.bbox.x2() > canvas.w || a.bbox.y2() > canvas.h) {
            report.errors.push_back(
                {DesignErrorKind::off_canvas, {a.id}, "bbox exits the canvas"});
        }

        if (a.text) {
            const DiagramElement* container = &a;
            if (a.text->container_id) {
                for (const auto* c : els)
                    if (c->id == *a.text->container_id) {
                        container = c;
                        break;
                    }
            }
            const auto [ew, eh] = perceptual_detail::text_extent(*a.text, th);
            if (ew > container->bbox.w + 1e-9 || eh > container->bbox.h + 1e-9) {
                report.errors.push_back({DesignErrorKind::text_overflow,
                                         {a.id, container->id},
                                         "estimated text extent exceeds container"});
            }
        }

        if (a.kind == ElementKind::connector) {
            const std::pair<double, double> ends[2] = {{a.bbox.x, a.bbox.y},
                                                       {a.bbox.x2(), a.bbox.y2()}};
            const char* labels[2] = {"start", "end"};
            for (int e = 0; e < 2; ++e) {
                bool snapped = false;
                for (const auto* c : els) {
                    if (c == &a) continue;
                    if (distance_to_rect(ends[e].first, ends[e].second, c->bbox) <=
                        th.connector_snap) {
                        snapped = true;
                        break;
                    }
                }
                if (!snapped) {
                    report.errors.push_back({DesignErrorKind::dangling_connector,
                                             {a.id},
                                             std::string(labels[e]) + " endpoint snaps to nothing"});
                }
            }
        }

        for (std::size_t j = i + 1; j < els.size(); ++j) {
            const DiagramElement& b = *els[j];

            if (a.opaque_filled() && b.opaque_filled() &&
                perceptual_detail::fillable(a.kind) && perceptual_detail::fillable(b.kind)) {
                const double inter = intersection_area(a.bbox, b.bbox);
                const double smaller = std::min(a.bbox.area(), b.bbox.area());
                if (smaller > 0.0 && inter > th.overlap_fraction * smaller) {
                    report.errors.push_back(
                        {DesignErrorKind::overlap, {a.id, b.id}, "opaque bboxes overlap"});
                }
            }

            const bool same_text =
                (!a.text && !b.text) ||
                (a.text && b.text && a.text->content == b.text->content);
            if (a.kind == b.kind && a.bbox == b.bbox && same_text) {
                report.errors.push_back(
                    {DesignErrorKind::duplicate, {a.id, b.id}, "identical kind+bbox+text"});
            }
        }
    }

    std::sort(report.errors.begin(), report.errors.end(),
              [](const DesignError& x, const DesignError& y) {
                  if (x.kind != y.kind) return x.kind < y.kind;
                  if (x.element_ids != y.element_ids) return x.element_ids < y.element_ids;
                  return x.detail < y.detail;
              });
    report.count_e = static_cast<double>(report.errors.size());
    return report;
}

// Design = 1 / (1 + 2e); e may be fractional (judge-run averages).
inline double design_score(double e) {
    if (e < 0.0) raise(ErrorKind::negative_count, "error count must be non-negative");
    return 1.0 / (1.0 + 2.0 * e);
}

struct ReadabilityThresholds {
    double min_font_px = 6.0;     // at 1024-short-side scale
    double min_contrast = 64.0;   // |text luma - backing luma| on 0..255
    double max_occlusion = 0.30;  // covered fraction of the text bbox
};

struct TextVerdict {
    std::string raw;
    std::string normalized;
    bool readable = false;
    std::vector<std::string> reasons;
};

struct ReadabilityReport {
    std::set<std::string> readable; // R; always a subset of extract_text_set(doc)
    std::vector<TextVerdict> per_text;
};

// A text is readable iff the rendered font is large enough, it contrasts with
// whatever backs it, and higher-z opaque elements cover at most 30% of it.
inline ReadabilityReport assess_readability(const VectorDocument& doc, const RasterGrid& grid,
                                            const ReadabilityThresholds& th = {}) {
    ReadabilityReport report;
    const double scale = static_cast<double>(std::min(grid.width, grid.height)) /
                         std::min(doc.canvas_width, doc.canvas_height);

    for (std::size_t idx = 0; idx < doc.elements.size(); ++idx) {
        const DiagramElement& el = doc.elements[idx];
        if (!el.text) continue;
        TextVerdict v;
        v.raw = el.text->content;
        v.normalized = normalize_text(el.text->content);

        if (el.text->font_size * scale < th.min_font_px) v.reasons.push_back("font_too_small");

        // Backing: highest-z filled element under the bbox center (self included),
        // canvas white otherwise.
        double backing = 255.0;
        bool found = false;
        int best_z = 0;
        std::size_t best_idx = 0;
        const double cx = el.bbox.cx(), cy = el.bbox.cy();
        for (std::size_t j = 0; j < doc.elements.size(); ++j) {
            const DiagramElement& c = doc.elements[j];
            if (!c.fill || c.fill->opacity <= 0.0) continue;
            if (c.z_order > el.z_order) continue;
            if (!c.bbox.contains(cx, cy)) continue;
            if (!found || c.z_order > best_z || (c.z_order == best_z && j > best_idx)) {
                found = true;
                best_z = c.z_order;
                best_idx = j;
                backing = luminance(c.fill->color);
            }
        }
        if (std::abs(static_cast<double>(luminance(el.text->color)) - backing) < th.min_contrast)
            v.reasons.push_back("low_contrast");

        if (el.bbox.area() > 0.0) {
            std::vector<Rect> covers;
            for (const auto& c : doc.elements) {
                if (&c == &el) continue;
                if (!c.fill || c.fill->opacity < 1.0) continue;
                if (c.z_order <= el.z_order) continue;
                const Rect inter = intersect(c.bbox, el.bbox);
                if (inter.area() > 0.0) covers.push_back(inter);
            }
            const double occluded = perceptual_detail::union_area(covers) / el.bbox.area();
            if (occluded > th.max_occlusion) v.reasons.push_back("occluded");
        }

        v.readable = v.reasons.empty();
        if (v.readable && !v.normalized.empty()) report.readable.insert(v.normalized);
        report.per_text.push_back(std::move(v));
    }
    return report;
}

// Readability = |R ∩ G| / |G|; with no generated text nothing can be illegible.
inline double readability_score(const ReadabilityReport& report,
                                const std::set<std::string>& generated) {
    if (generated.empty()) return 1.0;
    return static_cast<double>(intersection_size(report.readable, generated)) /
           static_cast<double>(generated.size());
}

} // namespace diagbench
