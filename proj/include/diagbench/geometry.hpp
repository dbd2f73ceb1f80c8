#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace diagbench {

// Axis-aligned rectangle in document units. Width/height may be zero (lines).
struct Rect {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double x2() const { return x + w; }
    double y2() const { return y + h; }
    double area() const { return w * h; }
    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }

    bool contains(double px, double py) const {
        return px >= x && px <= x2() && py >= y && py <= y2();
    }

    bool operator==(const Rect&) const = default;
};

inline Rect intersect(const Rect& a, const Rect& b) {
    const double x1 = std::max(a.x, b.x);
    const double y1 = std::max(a.y, b.y);
    const double x2 = std::min(a.x2(), b.x2());
    const double y2 = std::min(a.y2(), b.y2());
    if (x2 <= x1 || y2 <= y1) return {};
    return {x1, y1, x2 - x1, y2 - y1};
}

inline double intersection_area(const Rect& a, const Rect& b) {
    return intersect(a, b).area();
}

// Euclidean distance from a point to the closed rectangle (0 if inside).
inline double distance_to_rect(double px, double py, const Rect& r) {
    const double dx = std::max({r.x - px, 0.0, px - r.x2()});
    const double dy = std::max({r.y - py, 0.0, py - r.y2()});
    return std::hypot(dx, dy);
}

struct Color {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Color&) const = default;
};

// Rec.601 luma on the 0-255 scale.
inline std::uint8_t luminance(const Color& c) {
    const double y = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
    return static_cast<std::uint8_t>(std::lround(std::clamp(y, 0.0, 255.0)));
}

} // namespace diagbench
