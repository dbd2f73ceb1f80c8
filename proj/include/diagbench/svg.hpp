#pragma once

#include <cctype>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "diagbench/document.hpp"

namespace diagbench {

// Convenience reader for a small SVG subset: rect, ellipse, line, polyline,
// text, and <g> flattening. Anything else is rejected by name, never dropped.
// No transforms, no paths, no CSS; the manifest format is the canonical input.

namespace svg_detail {

struct Tag {
    enum Type { open, close, selfclose, chardata } type = open;
    std::string name;
    std::map<std::string, std::string> attrs;
    std::string data; // chardata only
};

inline std::string decode_entities(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        const std::size_t semi = s.find(';', i);
        if (semi == std::string::npos) raise(ErrorKind::malformed_input, "unterminated entity");
        const std::string ent = s.substr(i + 1, semi - i - 1);
        if (ent == "amp") out.push_back('&');
        else if (ent == "lt") out.push_back('<');
        else if (ent == "gt") out.push_back('>');
        else if (ent == "quot") out.push_back('"');
        else if (ent == "apos") out.push_back('\'');
        else if (!ent.empty() && ent[0] == '#') {
            const long cp = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                                ? std::strtol(ent.c_str() + 2, nullptr, 16)
                                : std::strtol(ent.c_str() + 1, nullptr, 10);
            if (cp <= 0 || cp > 0x10FFFF) raise(ErrorKind::malformed_input, "bad character reference");
            // encode as UTF-8
            char32_t u = static_cast<char32_t>(cp);
            if (u < 0x80) out.push_back(static_cast<char>(u));
            else if (u < 0x800) {
                out.push_back(static_cast<char>(0xC0 | (u >> 6)));
                out.push_back(static_cast<char>(0x80 | (u & 0x3F)));
            } else if (u < 0x10000) {
                out.push_back(static_cast<char>(0xE0 | (u >> 12)));
                out.push_back(static_cast<char>(0x80 | ((u >> 6) & 0x3F)));
                out.push_back(static_cast<char>(0x80 | (u & 0x3F)));
            } else {
                out.push_back(static_cast<char>(0xF0 | (u >> 18)));
                out.push_back(static_cast<char>(0x80 | ((u >> 12) & 0x3F)));
                out.push_back(static_cast<char>(0x80 | ((u >> 6) & 0x3F)));
                out.push_back(static_cast<char>(0x80 | (u & 0x3F)));
            }
        } else {
            raise(ErrorKind::malformed_input, "unknown entity '&" + ent + ";'");
        }
        i = semi + 1;
    }
    return out;
}

class Tokenizer {
public:
    explicit Tokenizer(const std::string& src) : src_(src) {}

    // Returns false at end of input.
    bool next(Tag& out) {
        while (pos_ < src_.size()) {
            if (src_[pos_] != '<') {
                const std::size_t lt = src_.find('<', pos_);
                const std::size_t end = (lt == std::string::npos) ? src_.size() : lt;
                std::string text = src_.substr(pos_, end - pos_);
                pos_ = end;
                if (text.find_first_not_of(" \t\r\n") == std::string::npos) continue;
                out = Tag{Tag::chardata, "", {}, decode_entities(text)};
                return true;
            }
            if (src_.compare(pos_, 4, "<!--") == 0) {
                const std::size_t end = src_.find("-->", pos_ + 4);
                if (end == std::string::npos) raise(ErrorKind::malformed_input, "unterminated comment");
                pos_ = end + 3;
                continue;
            }
            if (src_.compare(pos_, 2, "<?") == 0) {
                const std::size_t end = src_.find("?>", pos_ + 2);
                if (end == std::string::npos) raise(ErrorKind::malformed_input, "unterminated declaration");
                pos_ = end + 2;
                continue;
            }
            if (src_.compare(pos_, 2, "<!") == 0) { // DOCTYPE, CDATA not supported
                const std::size_t end = src_.find('>', pos_);
                if (end == std::string::npos) raise(ErrorKind::malformed_input, "unterminated markup declaration");
                pos_ = end + 1;
                continue;
            }
            return parse_tag(out);
        }
        return false;
    }

private:
    bool parse_tag(Tag& out) {
        ++pos_; // consume '<'
        out = Tag{};
        if (pos_ < src_.size() && src_[pos_] == '/') {
            ++pos_;
            out.type = Tag::close;
        }
        out.name = read_name();
        if (out.name.empty()) raise(ErrorKind::malformed_input, "tag without a name");
        for (;;) {
            skip_ws();
            if (pos_ >= src_.size()) raise(ErrorKind::malformed_input, "unterminated tag");
            if (src_[pos_] == '>') {
                ++pos_;
                return true;
            }
            if (src_[pos_] == '/') {
                ++pos_;
                skip_ws();
                if (pos_ >= src_.size() || src_[pos_] != '>')
                    raise(ErrorKind::malformed_input, "malformed self-closing tag");
                ++pos_;
                if (out.type == Tag::close) raise(ErrorKind::malformed_input, "self-closing end tag");
                out.type = Tag::selfclose;
                return true;
            }
            if (out.type == Tag::close) raise(ErrorKind::malformed_input, "attributes on end tag");
            const std::string key = read_name();
            if (key.empty()) raise(ErrorKind::malformed_input, "malformed attribute");
            skip_ws();
            if (pos_ >= src_.size() || src_[pos_] != '=')
                raise(ErrorKind::malformed_input, "attribute '" + key + "' without value");
            ++pos_;
            skip_ws();
            if (pos_ >= src_.size() || (src_[pos_] != '"' && src_[pos_] != '\''))
                raise(ErrorKind::malformed_input, "unquoted attribute value for '" + key + "'");
            const char quote = src_[pos_++];
            const std::size_t end = src_.find(quote, pos_);
            if (end == std::string::npos) raise(ErrorKind::malformed_input, "unterminated attribute value");
            out.attrs[key] = decode_entities(src_.substr(pos_, end - pos_));
            pos_ = end + 1;
        }
    }

    std::string read_name() {
        std::size_t b = pos_;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == ':' || c == '-' || c == '_' || c == '.')
                ++pos_;
            else
                break;
        }
        return src_.substr(b, pos_ - b);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
};

inline double to_number(const std::string& s, const std::string& what) {
    std::string t = s;
    if (t.size() > 2 && t.compare(t.size() - 2, 2, "px") == 0) t = t.substr(0, t.size() - 2);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0')
        raise(ErrorKind::malformed_input, "cannot parse number '" + s + "' for " + what);
    return v;
}

inline std::optional<Color> parse_paint(const std::string& s) {
    if (s == "none" || s == "transparent") return std::nullopt;
    if (!s.empty() && s[0] == '#') {
        auto hex = [&](char c) -> int {
            if (c >= '0' && c <= '9') return c - '0';
            if (c >= 'a' && c <= 'f') return c - 'a' + 10;
            if (c >= 'A' && c <= 'F') return c - 'A' + 10;
            raise(ErrorKind::malformed_input, "bad color '" + s + "'");
        };
        Color c;
        if (s.size() == 7) {
            c.r = static_cast<std::uint8_t>(hex(s[1]) * 16 + hex(s[2]));
            c.g = static_cast<std::uint8_t>(hex(s[3]) * 16 + hex(s[4]));
            c.b = static_cast<std::uint8_t>(hex(s[5]) * 16 + hex(s[6]));
        } else if (s.size() == 4) {
            c.r = static_cast<std::uint8_t>(hex(s[1]) * 17);
            c.g = static_cast<std::uint8_t>(hex(s[2]) * 17);
            c.b = static_cast<std::uint8_t>(hex(s[3]) * 17);
        } else {
            raise(ErrorKind::malformed_input, "bad color '" + s + "'");
        }
        return c;
    }
    static const std::map<std::string, Color> named = {
        {"black", {0, 0, 0}},     {"white", {255, 255, 255}}, {"red", {255, 0, 0}},
        {"green", {0, 128, 0}},   {"blue", {0, 0, 255}},      {"gray", {128, 128, 128}},
        {"grey", {128, 128, 128}},{"yellow", {255, 255, 0}},  {"orange", {255, 165, 0}},
        {"purple", {128, 0, 128}},{"cyan", {0, 255, 255}},    {"magenta", {255, 0, 255}},
    };
    const auto it = named.find(s);
    if (it == named.end()) raise(ErrorKind::malformed_input, "unknown color '" + s + "'");
    return it->second;
}

inline const std::string* find(const std::map<std::string, std::string>& attrs, const char* key) {
    const auto it = attrs.find(key);
    return it == attrs.end() ? nullptr : &it->second;
}

inline Rect points_bbox(const std::string& points) {
    double minx = 0, miny = 0, maxx = 0, maxy = 0;
    bool first = true;
    std::size_t i = 0;
    std::vector<double> nums;
    while (i < points.size()) {
        while (i < points.size() &&
               (std::isspace(static_cast<unsigned char>(points[i])) || points[i] == ','))
            ++i;
        if (i >= points.size()) break;
        char* end = nullptr;
        const double v = std::strtod(points.c_str() + i, &end);
        if (end == points.c_str() + i) raise(ErrorKind::malformed_input, "bad points list");
        nums.push_back(v);
        i = static_cast<std::size_t>(end - points.c_str());
    }
    if (nums.size() < 4 || nums.size() % 2 != 0)
        raise(ErrorKind::malformed_input, "points list needs >= 2 coordinate pairs");
    for (std::size_t k = 0; k < nums.size(); k += 2) {
        if (first) {
            minx = maxx = nums[k];
            miny = maxy = nums[k + 1];
            first = false;
        } else {
            minx = std::min(minx, nums[k]);
            maxx = std::max(maxx, nums[k]);
            miny = std::min(miny, nums[k + 1]);
            maxy = std::max(maxy, nums[k + 1]);
        }
    }
    return {minx, miny, maxx - minx, maxy - miny};
}

} // namespace svg_detail

inline VectorDocument parse_svg_subset(const std::string& bytes) {
    using svg_detail::Tag;
    svg_detail::Tokenizer tok(bytes);

    VectorDocument doc;
    std::vector<std::string> stack;
    bool saw_root = false;
    int auto_id = 0;
    DiagramElement* open_text = nullptr;

    static const char* supported_attr_rejects[] = {"transform", "style", "clip-path", "filter", "mask"};

    auto check_attrs = [&](const Tag& t) {
        for (const char* bad : supported_attr_rejects)
            if (t.attrs.count(bad)) raise(ErrorKind::unsupported_feature, bad);
    };

    auto take_id = [&](const Tag& t) {
        if (const auto* v = svg_detail::find(t.attrs, "id")) return *v;
        return std::string("e") + std::to_string(auto_id++);
    };

    auto apply_paint = [&](const Tag& t, DiagramElement& el, bool default_fill_black) {
        const auto* fill = svg_detail::find(t.attrs, "fill");
        std::optional<Color> fc =
            fill ? svg_detail::parse_paint(*fill)
                 : (default_fill_black ? std::optional<Color>(Color{0, 0, 0}) : std::nullopt);
        if (fc) {
            Fill f;
            f.color = *fc;
            if (const auto* o = svg_detail::find(t.attrs, "fill-opacity"))
                f.opacity = svg_detail::to_number(*o, "fill-opacity");
            el.fill = f;
        }
        if (const auto* stroke = svg_detail::find(t.attrs, "stroke")) {
            if (auto sc = svg_detail::parse_paint(*stroke)) {
                Stroke s;
                s.color = *sc;
                if (const auto* w = svg_detail::find(t.attrs, "stroke-width"))
                    s.width = svg_detail::to_number(*w, "stroke-width");
                el.stroke = s;
            }
        }
    };

    auto num_attr = [&](const Tag& t, const char* key, double fallback) {
        if (const auto* v = svg_detail::find(t.attrs, key)) return svg_detail::to_number(*v, key);
        return fallback;
    };

    Tag t;
    while (tok.next(t)) {
        if (t.type == Tag::chardata) {
            if (open_text && open_text->text)
                open_text->text->content += t.data;
            continue;
        }
        if (t.type == Tag::close) {
            if (stack.empty() || stack.back() != t.name)
                raise(ErrorKind::malformed_input, "mismatched </" + t.name + ">");
            if (t.name == "text") open_text = nullptr;
            stack.pop_back();
            continue;
        }

        const std::string& name = t.name;
        if (!saw_root) {
            if (name != "svg") raise(ErrorKind::malformed_input, "root element must be <svg>");
            saw_root = true;
            check_attrs(t);
            double w = num_attr(t, "width", 0.0);
            double h = num_attr(t, "height", 0.0);
            if (w <= 0.0 || h <= 0.0) {
                if (const auto* vb = svg_detail::find(t.attrs, "viewBox")) {
                    double vals[4] = {0, 0, 0, 0};
                    std::size_t i = 0;
                    int n = 0;
                    while (i < vb->size() && n < 4) {
                        while (i < vb->size() &&
                               (std::isspace(static_cast<unsigned char>((*vb)[i])) || (*vb)[i] == ','))
                            ++i;
                        if (i >= vb->size()) break;
                        char* end = nullptr;
                        vals[n++] = std::strtod(vb->c_str() + i, &end);
                        i = static_cast<std::size_t>(end - vb->c_str());
                    }
                    if (n == 4) {
                        w = vals[2];
                        h = vals[3];
                    }
                }
            }
            if (w <= 0.0 || h <= 0.0)
                raise(ErrorKind::malformed_input, "<svg> needs positive width/height or viewBox");
            doc.canvas_width = w;
            doc.canvas_height = h;
            if (t.type != Tag::selfclose) stack.push_back(name);
            continue;
        }

        if (name == "g") {
            check_attrs(t); // groups are flattened; transforms would change geometry
            if (t.type != Tag::selfclose) stack.push_back(name);
            continue;
        }

        if (name == "rect" || name == "ellipse" || name == "line" || name == "polyline" ||
            name == "text") {
            check_attrs(t);
            DiagramElement el;
            el.id = take_id(t);
            el.z_order = static_cast<int>(doc.elements.size());
            if (name == "rect") {
                el.kind = ElementKind::rect;
                el.bbox = {num_attr(t, "x", 0.0), num_attr(t, "y", 0.0),
                           num_attr(t, "width", 0.0), num_attr(t, "height", 0.0)};
                apply_paint(t, el, true);
            } else if (name == "ellipse") {
                el.kind = ElementKind::ellipse;
                const double cx = num_attr(t, "cx", 0.0), cy = num_attr(t, "cy", 0.0);
                const double rx = num_attr(t, "rx", 0.0), ry = num_attr(t, "ry", 0.0);
                el.bbox = {cx - rx, cy - ry, 2 * rx, 2 * ry};
                apply_paint(t, el, true);
            } else if (name == "line") {
                el.kind = ElementKind::line;
                const double x1 = num_attr(t, "x1", 0.0), y1 = num_attr(t, "y1", 0.0);
                const double x2 = num_attr(t, "x2", 0.0), y2 = num_attr(t, "y2", 0.0);
                el.bbox = {std::min(x1, x2), std::min(y1, y2), std::abs(x2 - x1), std::abs(y2 - y1)};
                apply_paint(t, el, false);
                if (!el.stroke) el.stroke = Stroke{{0, 0, 0}, 1.0};
            } else if (name == "polyline") {
                el.kind = ElementKind::polyline;
                const auto* pts = svg_detail::find(t.attrs, "points");
                if (!pts) raise(ErrorKind::malformed_input, "<polyline> needs points");
                el.bbox = svg_detail::points_bbox(*pts);
                apply_paint(t, el, false);
                if (!el.stroke) el.stroke = Stroke{{0, 0, 0}, 1.0};
            } else { // text
                el.kind = ElementKind::text_box;
                const double x = num_attr(t, "x", 0.0);
                const double y = num_attr(t, "y", 0.0);
                const double fs = num_attr(t, "font-size", 12.0);
                TextPayload p;
                p.font_size = fs;
                const auto* fill = svg_detail::find(t.attrs, "fill");
                p.color = fill ? svg_detail::parse_paint(*fill).value_or(Color{0, 0, 0})
                               : Color{0, 0, 0};
                el.text = p;
                el.bbox = {x, y - fs, 0.0, 1.2 * fs}; // width fixed up when content is known
            }
            doc.elements.push_back(std::move(el));
            if (name == "text") {
                if (t.type == Tag::selfclose)
                    raise(ErrorKind::malformed_input, "<text> without content");
                open_text = &doc.elements.back();
                stack.push_back(name);
            } else if (t.type != Tag::selfclose) {
                stack.push_back(name);
            }
            continue;
        }

        raise(ErrorKind::unsupported_feature, name);
    }

    if (!stack.empty()) raise(ErrorKind::malformed_input, "unclosed <" + stack.back() + ">");
    if (!saw_root) raise(ErrorKind::malformed_input, "no <svg> root");
    if (doc.elements.empty()) raise(ErrorKind::empty_document, "svg has zero drawable elements");

    // Estimate text box widths now that content is complete.
    for (auto& el : doc.elements) {
        if (el.kind != ElementKind::text_box || !el.text) continue;
        if (detail::trim(el.text->content).empty())
            raise(ErrorKind::malformed_input, "<text> with empty content");
        el.text->content = detail::trim(el.text->content);
        std::size_t cps = 0;
        for (std::size_t i = 0; i < el.text->content.size();) {
            const unsigned char c = static_cast<unsigned char>(el.text->content[i]);
            i += (c < 0x80) ? 1 : (c < 0xE0) ? 2 : (c < 0xF0) ? 3 : 4;
            ++cps;
        }
        if (el.bbox.w <= 0.0)
            el.bbox.w = 0.6 * el.text->font_size * static_cast<double>(cps);
    }

    validate(doc);
    return doc;
}

enum class InputFormat { manifest_json, svg_subset };

} // namespace diagbench
