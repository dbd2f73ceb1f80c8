#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "diagbench/document.hpp"
#include "diagbench/unicode_tables.hpp"

namespace diagbench {

namespace utf8 {

// Decodes one code point starting at i; advances i. Invalid bytes decode as U+FFFD
// and consume one byte, so normalization never throws on dirty input.
inline char32_t decode(const std::string& s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    const unsigned char c0 = byte(i);
    if (c0 < 0x80) { ++i; return c0; }
    int len = 0;
    char32_t cp = 0;
    if ((c0 & 0xE0) == 0xC0) { len = 2; cp = c0 & 0x1F; }
    else if ((c0 & 0xF0) == 0xE0) { len = 3; cp = c0 & 0x0F; }
    else if ((c0 & 0xF8) == 0xF0) { len = 4; cp = c0 & 0x07; }
    else { ++i; return 0xFFFD; }
    if (i + static_cast<std::size_t>(len) > s.size()) { ++i; return 0xFFFD; }
    for (int k = 1; k < len; ++k) {
        const unsigned char c = byte(i + static_cast<std::size_t>(k));
        if ((c & 0xC0) != 0x80) { ++i; return 0xFFFD; }
        cp = (cp << 6) | (c & 0x3F);
    }
    i += static_cast<std::size_t>(len);
    if (cp > 0x10FFFF) return 0xFFFD;
    return cp;
}

inline void encode(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::vector<char32_t> decode_all(const std::string& s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) out.push_back(decode(s, i));
    return out;
}

inline std::size_t codepoint_count(const std::string& s) {
    std::size_t i = 0, n = 0;
    while (i < s.size()) { decode(s, i); ++n; }
    return n;
}

} // namespace utf8

inline bool is_punct_or_symbol(char32_t cp) {
    const auto* begin = unicode::punct_symbol_ranges;
    const auto* end = begin + unicode::punct_symbol_range_count;
    auto it = std::upper_bound(begin, end, cp, [](char32_t v, const unicode::CodepointRange& r) {
        return v < r.first;
    });
    if (it == begin) return false;
    --it;
    return cp >= it->first && cp <= it->last;
}

inline char32_t to_lower(char32_t cp) {
    const auto* begin = unicode::lower_map;
    const auto* end = begin + unicode::lower_map_count;
    auto it = std::lower_bound(begin, end, cp, [](const unicode::LowerPair& p, char32_t v) {
        return p.from < v;
    });
    if (it != end && it->from == cp) return it->to;
    return cp;
}

inline bool is_unicode_space(char32_t cp) {
    switch (cp) {
        case U' ': case U'\t': case U'\n': case U'\r': case 0x0B: case 0x0C:
        case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Text normalization applied to both required (P) and generated (G) strings:
// strip punctuation and symbol code points, lowercase, collapse runs of
// whitespace to single spaces, trim. Input is assumed composed (NFC).
inline std::string normalize_text(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    std::size_t i = 0;
    while (i < raw.size()) {
        const char32_t cp = utf8::decode(raw, i);
        if (is_unicode_space(cp)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (is_punct_or_symbol(cp)) continue;
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        utf8::encode(to_lower(cp), out);
    }
    return out;
}

inline std::set<std::string> normalize_set(const std::vector<std::string>& raw) {
    std::set<std::string> out;
    for (const auto& s : raw) {
        std::string n = normalize_text(s);
        if (!n.empty()) out.insert(std::move(n));
    }
    return out;
}

// The generated set G: every TextPayload content, normalized, set semantics.
inline std::set<std::string> extract_text_set(const VectorDocument& doc) {
    std::set<std::string> out;
    for (const auto& el : doc.elements) {
        if (!el.text) continue;
        std::string n = normalize_text(el.text->content);
        if (!n.empty()) out.insert(std::move(n));
    }
    return out;
}

} // namespace diagbench
