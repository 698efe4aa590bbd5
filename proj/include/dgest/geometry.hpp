// Small planar geometry types shared by the mesh and assembly code.
#pragma once

#include <array>
#include <cmath>

namespace dgest {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& v) { return std::sqrt(dot(v, v)); }

// Row-major 2x2 matrix; enough linear algebra for element maps.
struct Mat2 {
    double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;

    double det() const { return a00 * a11 - a01 * a10; }

    Mat2 inverse() const {
        const double d = det();
        return {a11 / d, -a01 / d, -a10 / d, a00 / d};
    }

    Mat2 transpose() const { return {a00, a10, a01, a11}; }

    Vec2 apply(const Vec2& v) const { return {a00 * v.x + a01 * v.y, a10 * v.x + a11 * v.y}; }
};

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    double diameter() const { return std::hypot(width(), height()); }

    static Rect unit_square() { return {0.0, 0.0, 1.0, 1.0}; }
};

} // namespace dgest
