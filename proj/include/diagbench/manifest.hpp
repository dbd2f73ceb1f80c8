#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "diagbench/document.hpp"

namespace diagbench {

// Canonical interchange format. Schema:
//   {"canvas":{"w":..,"h":..},
//    "elements":[{"id":..,"kind":..,"bbox":[x,y,w,h],
//                 "fill":{"color":"#RRGGBB","opacity":..}?,
//                 "stroke":{"color":"#RRGGBB","width":..}?,
//                 "text":{"content":..,"font_size":..,"color":"#RRGGBB","container_id":..?}?,
//                 "z":..}, ...],
//    "source_id":..?}

namespace detail {

inline std::string color_to_hex(const Color& c) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02X%02X%02X", c.r, c.g, c.b);
    return buf;
}

inline Color color_from_hex(const std::string& s) {
    auto hex = [&](std::size_t i) -> int {
        const char c = s[i];
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        raise(ErrorKind::malformed_input, "bad color literal '" + s + "'");
    };
    if (s.size() != 7 || s[0] != '#')
        raise(ErrorKind::malformed_input, "bad color literal '" + s + "'");
    Color c;
    c.r = static_cast<std::uint8_t>(hex(1) * 16 + hex(2));
    c.g = static_cast<std::uint8_t>(hex(3) * 16 + hex(4));
    c.b = static_cast<std::uint8_t>(hex(5) * 16 + hex(6));
    return c;
}

inline double require_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number())
        raise(ErrorKind::malformed_input, std::string("missing numeric field '") + key + "'");
    return j[key].get<double>();
}

inline std::string require_string(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string())
        raise(ErrorKind::malformed_input, std::string("missing string field '") + key + "'");
    return j[key].get<std::string>();
}

} // namespace detail

inline nlohmann::json to_manifest_json(const VectorDocument& doc) {
    nlohmann::json j;
    j["canvas"] = {{"w", doc.canvas_width}, {"h", doc.canvas_height}};
    j["elements"] = nlohmann::json::array();
    for (const auto& el : doc.elements) {
        nlohmann::json e;
        e["id"] = el.id;
        e["kind"] = to_string(el.kind);
        e["bbox"] = {el.bbox.x, el.bbox.y, el.bbox.w, el.bbox.h};
        e["z"] = el.z_order;
        if (el.fill)
            e["fill"] = {{"color", detail::color_to_hex(el.fill->color)}, {"opacity", el.fill->opacity}};
        if (el.stroke)
            e["stroke"] = {{"color", detail::color_to_hex(el.stroke->color)}, {"width", el.stroke->width}};
        if (el.text) {
            nlohmann::json t;
            t["content"] = el.text->content;
            t["font_size"] = el.text->font_size;
            t["color"] = detail::color_to_hex(el.text->color);
            if (el.text->container_id) t["container_id"] = *el.text->container_id;
            e["text"] = t;
        }
        j["elements"].push_back(e);
    }
    if (!doc.source_id.empty()) j["source_id"] = doc.source_id;
    return j;
}

// Canonical bytes: sorted object keys (nlohmann::json ordering) and shortest
// round-trip number formatting, so equal documents serialize identically.
inline std::string serialize_manifest(const VectorDocument& doc) {
    return to_manifest_json(doc).dump();
}

inline VectorDocument document_from_manifest_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("canvas") || !j.contains("elements"))
        raise(ErrorKind::malformed_input, "manifest must carry 'canvas' and 'elements'");
    VectorDocument doc;
    doc.canvas_width = detail::require_number(j["canvas"], "w");
    doc.canvas_height = detail::require_number(j["canvas"], "h");
    if (j.contains("source_id")) doc.source_id = j["source_id"].get<std::string>();
    if (!j["elements"].is_array())
        raise(ErrorKind::malformed_input, "'elements' must be an array");
    for (const auto& e : j["elements"]) {
        DiagramElement el;
        el.id = detail::require_string(e, "id");
        const std::string kind = detail::require_string(e, "kind");
        const auto k = element_kind_from(kind);
        if (!k) raise(ErrorKind::malformed_input, "unknown element kind '" + kind + "'");
        el.kind = *k;
        if (!e.contains("bbox") || !e["bbox"].is_array() || e["bbox"].size() != 4)
            raise(ErrorKind::malformed_input, "element '" + el.id + "' needs bbox [x,y,w,h]");
        el.bbox = {e["bbox"][0].get<double>(), e["bbox"][1].get<double>(),
                   e["bbox"][2].get<double>(), e["bbox"][3].get<double>()};
        if (e.contains("z")) el.z_order = e["z"].get<int>();
        if (e.contains("fill")) {
            Fill f;
            f.color = detail::color_from_hex(detail::require_string(e["fill"], "color"));
            if (e["fill"].contains("opacity")) f.opacity = e["fill"]["opacity"].get<double>();
            el.fill = f;
        }
        if (e.contains("stroke")) {
            Stroke s;
            s.color = detail::color_from_hex(detail::require_string(e["stroke"], "color"));
            if (e["stroke"].contains("width")) s.width = e["stroke"]["width"].get<double>();
            el.stroke = s;
        }
        if (e.contains("text")) {
            const auto& t = e["text"];
            TextPayload p;
            p.content = detail::require_string(t, "content");
            p.font_size = detail::require_number(t, "font_size");
            p.color = detail::color_from_hex(detail::require_string(t, "color"));
            if (t.contains("container_id")) p.container_id = t["container_id"].get<std::string>();
            el.text = p;
        }
        doc.elements.push_back(std::move(el));
    }
    if (doc.elements.empty()) raise(ErrorKind::empty_document, "manifest has zero elements");
    validate(doc);
    return doc;
}

inline VectorDocument parse_manifest(const std::string& bytes) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorKind::malformed_input, e.what());
    }
    return document_from_manifest_json(j);
}

} // namespace diagbench
