#ifndef APFPRED_GEOMETRY_HPP_
#define APFPRED_GEOMETRY_HPP_

#include <cmath>

namespace apfpred {

/// Planar vector in world coordinates (meters for points, force units for forces).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  constexpr double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double angle() const { return std::atan2(y, x); }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double distance(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

inline Vec2 unit_from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

inline Vec2 rotate(const Vec2& v, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Unsigned angle in [0, pi] between two nonzero vectors.
inline double angle_between(const Vec2& a, const Vec2& b) {
  return std::atan2(std::abs(a.cross(b)), a.dot(b));
}

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }

}  // namespace apfpred

#endif  // APFPRED_GEOMETRY_HPP_
