#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace brakke {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Phase label, 1..N. Zero is reserved for "outside the domain".
using Label = int;

constexpr double kPi = std::numbers::pi;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid numerical parameter (eps out of range, negative step, ...).
struct ParameterError : Error {
  using Error::Error;
};

/// Query point outside the region where an operation is defined.
struct DomainError : Error {
  using Error::Error;
};

/// A network that fails its structural invariants where a valid one is required.
struct StructuralError : Error {
  using Error::Error;
};

/// Retraction component touches two or more phases.
struct AmbiguityError : Error {
  using Error::Error;
};

/// Flow step could not keep the network embedded even after step halving.
struct StepSizeError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Counter-clockwise quarter turn.
inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

inline double sq(double x) { return x * x; }

/// Distance from p to the closed segment [a, b].
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double l2 = ab.squaredNorm();
  if (l2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / l2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

inline Vec2 closest_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double l2 = ab.squaredNorm();
  if (l2 == 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / l2, 0.0, 1.0);
  return a + t * ab;
}

/// Closed-segment intersection test (touching counts).
inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double d1 = cross(b - a, c - a);
  const double d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c);
  const double d4 = cross(d - c, b - c);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on_seg = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x(), q.x()) <= r.x() && r.x() <= std::max(p.x(), q.x()) &&
           std::min(p.y(), q.y()) <= r.y() && r.y() <= std::max(p.y(), q.y());
  };
  if (d1 == 0 && on_seg(a, b, c)) return true;
  if (d2 == 0 && on_seg(a, b, d)) return true;
  if (d3 == 0 && on_seg(c, d, a)) return true;
  if (d4 == 0 && on_seg(c, d, b)) return true;
  return false;
}

/// Distance between two closed segments.
inline double segment_segment_distance(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  if (segments_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

}  // namespace brakke
