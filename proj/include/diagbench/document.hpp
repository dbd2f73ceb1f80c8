#pragma once

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "diagbench/error.hpp"
#include "diagbench/geometry.hpp"

namespace diagbench {

enum class ElementKind {
    rect,
    ellipse,
    line,
    polyline,
    connector,
    text_box,
};

inline const char* to_string(ElementKind k) {
    switch (k) {
        case ElementKind::rect: return "rect";
        case ElementKind::ellipse: return "ellipse";
        case ElementKind::line: return "line";
        case ElementKind::polyline: return "polyline";
        case ElementKind::connector: return "connector";
        case ElementKind::text_box: return "text-box";
    }
    return "?";
}

inline std::optional<ElementKind> element_kind_from(const std::string& s) {
    if (s == "rect") return ElementKind::rect;
    if (s == "ellipse") return ElementKind::ellipse;
    if (s == "line") return ElementKind::line;
    if (s == "polyline") return ElementKind::polyline;
    if (s == "connector") return ElementKind::connector;
    if (s == "text-box") return ElementKind::text_box;
    return std::nullopt;
}

struct Fill {
    Color color;
    double opacity = 1.0;

    bool operator==(const Fill&) const = default;
};

struct Stroke {
    Color color;
    double width = 1.0;

    bool operator==(const Stroke&) const = default;
};

struct TextPayload {
    std::string content;          // non-empty after whitespace trimming
    double font_size = 12.0;      // points, treated as document units
    Color color;
    std::optional<std::string> container_id;

    bool operator==(const TextPayload&) const = default;
};

struct DiagramElement {
    std::string id;
    ElementKind kind = ElementKind::rect;
    Rect bbox;
    std::optional<Fill> fill;
    std::optional<Stroke> stroke;
    std::optional<TextPayload> text;
    int z_order = 0;

    bool opaque_filled() const { return fill.has_value() && fill->opacity >= 1.0; }

    bool operator==(const DiagramElement&) const = default;
};

// The unit being scored: a canvas plus typed diagram elements in document order.
// Immutable by convention after validate(); all metric operations take it by const&.
struct VectorDocument {
    double canvas_width = 0.0;
    double canvas_height = 0.0;
    std::vector<DiagramElement> elements;
    std::string source_id;

    std::size_t element_count() const { return elements.size(); }

    bool operator==(const VectorDocument&) const = default;
};

namespace detail {

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

} // namespace detail

// Enforces the structural invariants; throws MalformedInput on violation.
inline void validate(const VectorDocument& doc) {
    if (!(doc.canvas_width > 0.0) || !(doc.canvas_height > 0.0))
        raise(ErrorKind::malformed_input, "canvas dimensions must be positive");
    std::unordered_set<std::string> seen;
    for (const auto& el : doc.elements) {
        if (el.id.empty())
            raise(ErrorKind::malformed_input, "element with empty id");
        if (!seen.insert(el.id).second)
            raise(ErrorKind::malformed_input, "duplicate element id '" + el.id + "'");
        if (el.bbox.w < 0.0 || el.bbox.h < 0.0)
            raise(ErrorKind::malformed_input, "negative bbox extent on '" + el.id + "'");
        if (el.fill && (el.fill->opacity < 0.0 || el.fill->opacity > 1.0))
            raise(ErrorKind::malformed_input, "opacity outside [0,1] on '" + el.id + "'");
        if (el.stroke && el.stroke->width < 0.0)
            raise(ErrorKind::malformed_input, "negative stroke width on '" + el.id + "'");
        if (el.text && detail::trim(el.text->content).empty())
            raise(ErrorKind::malformed_input, "empty text content on '" + el.id + "'");
        if (el.text && !(el.text->font_size > 0.0))
            raise(ErrorKind::malformed_input, "non-positive font size on '" + el.id + "'");
    }
}

} // namespace diagbench
