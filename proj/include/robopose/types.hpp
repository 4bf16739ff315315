#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace robopose {

/// Integer pixel coordinate, origin top-left, x to the right, y down.
struct Point {
    int x = 0;
    int y = 0;

    friend bool operator==(const Point&, const Point&) = default;
    /// Lexicographic on (x, y).
    friend auto operator<=>(const Point&, const Point&) = default;
};

/// Row-major scan order: by y, then x.
inline bool raster_less(const Point& a, const Point& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
}

inline bool is_8_adjacent(const Point& a, const Point& b) {
    const int dx = std::abs(a.x - b.x);
    const int dy = std::abs(a.y - b.y);
    return (dx | dy) != 0 && dx <= 1 && dy <= 1;
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}
    explicit Vec2(const Point& p) : x(p.x), y(p.y) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double norm() const { return std::hypot(x, y); }
    Vec2 normalized() const { const double n = norm(); return {x / n, y / n}; }

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
/// 2D scalar cross product a.x*b.y - a.y*b.x.
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

inline constexpr double kPi = 3.14159265358979323846;
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Error hierarchy. Every failure surfaced by the library derives from Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error { public: using Error::Error; };
class FormatError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class NotFoundError : public Error { public: using Error::Error; };
class DegenerateInputError : public Error { public: using Error::Error; };
class InsufficientDataError : public Error { public: using Error::Error; };
class UndefinedCorrelationError : public Error { public: using Error::Error; };
class SpecError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

}  // namespace robopose
