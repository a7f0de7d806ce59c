#pragma once

#include <cmath>

namespace sfs {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr bool operator==(const Vec2&) const = default;
};

struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  constexpr Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr bool operator==(const Vec3&) const = default;

  //! Projection onto the image plane.
  constexpr Vec2 xy() const { return {x, y}; }
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(Vec3 a) { return a * (1.0 / norm(a)); }

//! Unit normal (-p, 1) / sqrt(1 + |p|^2) of the graph z = u(x, y) with slope p.
inline Vec3 graph_normal(Vec2 grad_u) {
  const double s = std::sqrt(1.0 + dot(grad_u, grad_u));
  return {-grad_u.x / s, -grad_u.y / s, 1.0 / s};
}

}  // namespace sfs
