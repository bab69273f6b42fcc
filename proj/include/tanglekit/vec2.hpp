#pragma once

#include <cmath>

namespace tanglekit {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    // z-component of the 2-D cross product
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm_sq() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm_sq()); }
    // 90-degree counterclockwise rotation
    Vec2 perp() const { return {-y, x}; }

    Vec2 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
};

inline Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }

inline double dot(const Vec2& a, const Vec2& b) { return a.dot(b); }
inline double dist_sq(const Vec2& a, const Vec2& b) { return (a - b).norm_sq(); }
inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

} // namespace tanglekit
