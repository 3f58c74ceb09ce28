#pragma once

// Convex host domain, its boundary calculus, and the scale-indexed region
// system (D_j, D_{j,k}, K_j and its enlargements) used by the epoch scheme.

#include "brakke/core.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace brakke {

class ConvexDomain {
 public:
  enum class Shape { Disk, Ellipse, Polygon };

  static ConvexDomain disk(const Vec2& center, double radius) {
    if (!(radius > 0.0)) throw ParameterError("disk radius must be positive");
    ConvexDomain d;
    d.shape_ = Shape::Disk;
    d.center_ = center;
    d.a_ = d.b_ = radius;
    d.tube_ = 0.5 * radius;
    return d;
  }

  /// Axis-aligned ellipse with semi-axes a (along x) and b (along y).
  static ConvexDomain ellipse(const Vec2& center, double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw ParameterError("ellipse semi-axes must be positive");
    ConvexDomain d;
    d.shape_ = Shape::Ellipse;
    d.center_ = center;
    d.a_ = a;
    d.b_ = b;
    const double lo = std::min(a, b), hi = std::max(a, b);
    d.tube_ = 0.5 * lo * lo / hi;
    return d;
  }

  /// Counter-clockwise strictly convex polygon; an approximation of a smooth
  /// boundary, so at least 32 vertices are required.
  static ConvexDomain polygon(std::vector<Vec2> vertices) {
    const std::size_t n = vertices.size();
    if (n < 32) throw ParameterError("polygon domain needs at least 32 vertices");
    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) area2 += cross(vertices[i], vertices[(i + 1) % n]);
    if (area2 < 0.0) std::reverse(vertices.begin(), vertices.end());
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& p = vertices[(i + n - 1) % n];
      const Vec2& q = vertices[i];
      const Vec2& r = vertices[(i + 1) % n];
      if (!(cross(q - p, r - q) > 0.0))
        throw ParameterError("polygon domain is not strictly convex at vertex " + std::to_string(i));
    }
    ConvexDomain d;
    d.shape_ = Shape::Polygon;
    d.poly_ = std::move(vertices);
    Vec2 c = Vec2::Zero();
    for (const auto& v : d.poly_) c += v;
    d.center_ = c / static_cast<double>(n);
    d.tube_ = 0.5 * d.inradius();
    return d;
  }

  Shape shape() const { return shape_; }
  const Vec2& center() const { return center_; }
  double semi_axis_x() const { return a_; }
  double semi_axis_y() const { return b_; }
  const std::vector<Vec2>& vertices() const { return poly_; }

  /// Polygons violate the C^2 boundary assumption; callers may want to warn.
  bool approximates_smooth_boundary() const { return shape_ == Shape::Polygon; }

  /// Width s0 of the tubular neighbourhood where nearest-point projection is used.
  double tube_width() const { return tube_; }
  void set_tube_width(double s) {
    if (!(s > 0.0)) throw ParameterError("tube width must be positive");
    tube_ = s;
  }

  double area() const {
    switch (shape_) {
      case Shape::Disk:
      case Shape::Ellipse:
        return kPi * a_ * b_;
      case Shape::Polygon: {
        double s = 0.0;
        for (std::size_t i = 0; i < poly_.size(); ++i) s += cross(poly_[i], poly_[(i + 1) % poly_.size()]);
        return 0.5 * s;
      }
    }
    return 0.0;
  }

  /// Nearest point of the boundary curve.
  Vec2 nearest_boundary_point(const Vec2& p) const { return project(p).first; }

  /// Positive inside, zero on the boundary, negative outside.
  double signed_distance(const Vec2& p) const {
    if (shape_ == Shape::Disk) return a_ - (p - center_).norm();
    return project(p).second;
  }

  bool contains(const Vec2& p) const { return signed_distance(p) > 0.0; }

  /// nu_U = -grad d_U, defined in the tube of width s0 around the boundary.
  Vec2 outward_normal(const Vec2& p) const {
    const auto [q, sd] = project(p);
    if (std::abs(sd) > tube_) throw DomainError("point outside the tubular neighbourhood of the boundary");
    return boundary_normal_at(q, p, sd);
  }

  /// Outward unit normal at a boundary point q.
  Vec2 boundary_normal(const Vec2& q) const { return boundary_normal_at(q, q, 0.0); }

  /// Boundary parameter: angle for disk/ellipse, edge index + fraction for polygons.
  double parameter_period() const {
    return shape_ == Shape::Polygon ? static_cast<double>(poly_.size()) : 2.0 * kPi;
  }

  double boundary_parameter(const Vec2& p) const {
    switch (shape_) {
      case Shape::Disk:
      case Shape::Ellipse: {
        const Vec2 q = nearest_boundary_point(p) - center_;
        double th = std::atan2(q.y() / b_, q.x() / a_);
        if (th < 0.0) th += 2.0 * kPi;
        return th;
      }
      case Shape::Polygon: {
        const std::size_t n = poly_.size();
        double best = std::numeric_limits<double>::infinity(), s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const Vec2& a = poly_[i];
          const Vec2& b = poly_[(i + 1) % n];
          const Vec2 ab = b - a;
          const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
          const double d = (p - (a + t * ab)).norm();
          if (d < best) {
            best = d;
            s = static_cast<double>(i) + t;
          }
        }
        if (s >= static_cast<double>(n)) s -= static_cast<double>(n);
        return s;
      }
    }
    return 0.0;
  }

  Vec2 boundary_point(double s) const {
    switch (shape_) {
      case Shape::Disk:
      case Shape::Ellipse:
        return center_ + Vec2(a_ * std::cos(s), b_ * std::sin(s));
      case Shape::Polygon: {
        const double period = parameter_period();
        s = std::fmod(s, period);
        if (s < 0.0) s += period;
        const auto i = static_cast<std::size_t>(std::floor(s)) % poly_.size();
        const double t = s - std::floor(s);
        return poly_[i] + t * (poly_[(i + 1) % poly_.size()] - poly_[i]);
      }
    }
    return center_;
  }

  /// (1/2) * integral of (x dy - y dx) along the boundary, counter-clockwise
  /// from parameter s0 to s1 (wrapping when s1 <= s0 unless full).
  double boundary_green(double s0, double s1) const {
    const double period = parameter_period();
    while (s1 <= s0) s1 += period;
    switch (shape_) {
      case Shape::Disk:
      case Shape::Ellipse: {
        const double cx = center_.x(), cy = center_.y();
        return 0.5 * (a_ * b_ * (s1 - s0) + cx * b_ * (std::sin(s1) - std::sin(s0)) -
                      cy * a_ * (std::cos(s1) - std::cos(s0)));
      }
      case Shape::Polygon: {
        double acc = 0.0;
        Vec2 prev = boundary_point(s0);
        for (double k = std::floor(s0) + 1.0; k < s1; k += 1.0) {
          const Vec2 v = boundary_point(k);
          acc += cross(prev, v);
          prev = v;
        }
        acc += cross(prev, boundary_point(s1));
        return 0.5 * acc;
      }
    }
    return 0.0;
  }

  /// Sampled boundary arc (counter-clockwise), endpoints included.
  std::vector<Vec2> boundary_arc(double s0, double s1, int samples) const {
    const double period = parameter_period();
    while (s1 <= s0) s1 += period;
    std::vector<Vec2> out;
    if (shape_ == Shape::Polygon) {
      out.push_back(boundary_point(s0));
      for (double k = std::floor(s0) + 1.0; k < s1; k += 1.0) out.push_back(boundary_point(k));
      out.push_back(boundary_point(s1));
      return out;
    }
    samples = std::max(samples, 2);
    for (int i = 0; i <= samples; ++i) out.push_back(boundary_point(s0 + (s1 - s0) * i / samples));
    return out;
  }

  /// Parameter t > 0 at which the ray p + t*dir leaves the closed domain
  /// (p assumed inside). Returns nullopt if the ray misses.
  std::optional<double> ray_exit(const Vec2& p, const Vec2& dir) const {
    switch (shape_) {
      case Shape::Disk:
      case Shape::Ellipse: {
        const Vec2 q((p.x() - center_.x()) / a_, (p.y() - center_.y()) / b_);
        const Vec2 d(dir.x() / a_, dir.y() / b_);
        const double A = d.squaredNorm(), B = 2.0 * q.dot(d), C = q.squaredNorm() - 1.0;
        const double disc = B * B - 4.0 * A * C;
        if (disc < 0.0 || A == 0.0) return std::nullopt;
        const double t = (-B + std::sqrt(disc)) / (2.0 * A);
        if (t < 0.0) return std::nullopt;
        return t;
      }
      case Shape::Polygon: {
        double best = std::numeric_limits<double>::infinity();
        const std::size_t n = poly_.size();
        for (std::size_t i = 0; i < n; ++i) {
          const Vec2& a = poly_[i];
          const Vec2 e = poly_[(i + 1) % n] - a;
          const Vec2 nrm(e.y(), -e.x());
          const double den = nrm.dot(dir);
          if (den <= 0.0) continue;
          best = std::min(best, nrm.dot(a - p) / den);
        }
        if (!std::isfinite(best) || best < 0.0) return std::nullopt;
        return best;
      }
    }
    return std::nullopt;
  }

  /// Nearest point of the inner parallel set {dist(., boundary) >= s} (s >= 0,
  /// below the tube width) for a point outside it; identity inside.
  Vec2 project_to_inner_parallel(const Vec2& p, double s) const {
    const auto [q, sd] = project(p);
    if (sd >= s) return p;
    return q - s * boundary_normal_at(q, p, sd);
  }

 private:
  Shape shape_ = Shape::Disk;
  Vec2 center_ = Vec2::Zero();
  double a_ = 1.0, b_ = 1.0;
  double tube_ = 0.5;
  std::vector<Vec2> poly_;

  Vec2 boundary_normal_at(const Vec2& q, const Vec2& p, double sd) const {
    switch (shape_) {
      case Shape::Disk: {
        Vec2 v = p - center_;
        if (v.norm() == 0.0) v = q - center_;
        return v.normalized();
      }
      case Shape::Ellipse: {
        const Vec2 r = q - center_;
        return Vec2(r.x() / (a_ * a_), r.y() / (b_ * b_)).normalized();
      }
      case Shape::Polygon: {
        const Vec2 dv = p - q;
        if (dv.norm() > 1e-14) return (sd < 0.0 ? dv : Vec2(-dv)).normalized();
        // On the boundary: normal of the nearest edge.
        const double s = boundary_parameter(q);
        const auto i = static_cast<std::size_t>(std::floor(s)) % poly_.size();
        const Vec2 e = poly_[(i + 1) % poly_.size()] - poly_[i];
        return Vec2(e.y(), -e.x()).normalized();
      }
    }
    return Vec2::UnitX();
  }

  // Nearest boundary point and signed distance.
  std::pair<Vec2, double> project(const Vec2& p) const {
    switch (shape_) {
      case Shape::Disk: {
        Vec2 v = p - center_;
        const double r = v.norm();
        if (r == 0.0) v = Vec2::UnitX();
        else v /= r;
        return {center_ + a_ * v, a_ - r};
      }
      case Shape::Ellipse:
        return project_ellipse(p);
      case Shape::Polygon: {
        const std::size_t n = poly_.size();
        double best = std::numeric_limits<double>::infinity();
        Vec2 q = poly_[0];
        bool inside = true;
        for (std::size_t i = 0; i < n; ++i) {
          const Vec2& a = poly_[i];
          const Vec2& b = poly_[(i + 1) % n];
          if (cross(b - a, p - a) < 0.0) inside = false;
          const Vec2 c = closest_on_segment(p, a, b);
          const double d = (p - c).norm();
          if (d < best) {
            best = d;
            q = c;
          }
        }
        return {q, inside ? best : -best};
      }
    }
    return {p, 0.0};
  }

  // Robust nearest point on an ellipse (bisection on the Lagrange parameter).
  std::pair<Vec2, double> project_ellipse(const Vec2& p) const {
    Vec2 rel = p - center_;
    const bool swap = a_ < b_;
    double e0 = swap ? b_ : a_, e1 = swap ? a_ : b_;
    double y0 = swap ? rel.y() : rel.x(), y1 = swap ? rel.x() : rel.y();
    const double s0 = y0 < 0 ? -1.0 : 1.0, s1 = y1 < 0 ? -1.0 : 1.0;
    y0 = std::abs(y0);
    y1 = std::abs(y1);
    double x0 = 0.0, x1 = 0.0;
    if (y1 > 0.0) {
      if (y0 > 0.0) {
        const double z0 = y0 / e0, z1 = y1 / e1;
        const double g = z0 * z0 + z1 * z1 - 1.0;
        if (g != 0.0) {
          const double r0 = (e0 / e1) * (e0 / e1);
          const double n0 = r0 * z0;
          double lo = z1 - 1.0, hi = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0, s = 0.0;
          for (int it = 0; it < 1100; ++it) {
            s = 0.5 * (lo + hi);
            if (s == lo || s == hi) break;
            const double ra = n0 / (s + r0), rb = z1 / (s + 1.0);
            const double gg = ra * ra + rb * rb - 1.0;
            if (gg > 0.0) lo = s;
            else if (gg < 0.0) hi = s;
            else break;
          }
          x0 = r0 * y0 / (s + r0);
          x1 = y1 / (s + 1.0);
        } else {
          x0 = y0;
          x1 = y1;
        }
      } else {
        x0 = 0.0;
        x1 = e1;
      }
    } else {
      const double numer0 = e0 * y0, denom0 = e0 * e0 - e1 * e1;
      if (numer0 < denom0) {
        const double xde0 = numer0 / denom0;
        x0 = e0 * xde0;
        x1 = e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0));
      } else {
        x0 = e0;
        x1 = 0.0;
      }
    }
    const double dist = std::hypot(x0 - y0, x1 - y1);
    const bool inside = sq(y0 / e0) + sq(y1 / e1) < 1.0;
    x0 *= s0;
    x1 *= s1;
    const Vec2 q = swap ? Vec2(x1, x0) : Vec2(x0, x1);
    return {center_ + q, inside ? dist : -dist};
  }

  // Largest inscribed-circle radius via nested ternary search of the concave
  // signed distance.
  double inradius() const {
    double xmin = poly_[0].x(), xmax = xmin, ymin = poly_[0].y(), ymax = ymin;
    for (const auto& v : poly_) {
      xmin = std::min(xmin, v.x());
      xmax = std::max(xmax, v.x());
      ymin = std::min(ymin, v.y());
      ymax = std::max(ymax, v.y());
    }
    auto best_y = [&](double x) {
      double lo = ymin, hi = ymax;
      for (int i = 0; i < 100; ++i) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (project({x, m1}).second < project({x, m2}).second) lo = m1;
        else hi = m2;
      }
      return project({x, 0.5 * (lo + hi)}).second;
    };
    double lo = xmin, hi = xmax;
    for (int i = 0; i < 100; ++i) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (best_y(m1) < best_y(m2)) lo = m1;
      else hi = m2;
    }
    return best_y(0.5 * (lo + hi));
  }
};

/// Regular N-gon inscribed in a circle, counter-clockwise.
inline ConvexDomain regular_polygon_domain(const Vec2& center, double radius, int n) {
  std::vector<Vec2> v;
  v.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * kPi * i / n;
    v.push_back(center + radius * Vec2(std::cos(th), std::sin(th)));
  }
  return ConvexDomain::polygon(std::move(v));
}

// ---------------------------------------------------------------------------
// Scale-indexed regions.

/// Scheme scale j and epoch counter k. The scale is integer-valued but stored
/// as a double: admissible paper-mode scales exceed 64-bit integer range.
struct RegionIndex {
  double j = 1.0;
  std::int64_t k = 0;

  double quarter_root() const { return std::pow(j, 0.25); }
  double eighth_root() const { return std::pow(j, 0.125); }

  /// D_j = {dist(x, dU) >= 2 j^{-1/4}}.
  double d_threshold() const { return 2.0 / quarter_root(); }
  /// D_{j,k} = {dist(x, dU) >= j^{-1/4} - k exp(-j^{1/8})}.
  double djk_threshold() const {
    return 1.0 / quarter_root() - static_cast<double>(k) * std::exp(-eighth_root());
  }
  double k_radius() const { return 1.0 / quarter_root(); }
  double k_tilde_radius() const { return 2.0 / quarter_root(); }
  double k_hat_radius() const { return 3.0 / eighth_root(); }
};

struct Segment {
  Vec2 a, b;
};

/// Finite set of closed segments (points are zero-length segments).
struct SegmentSet {
  std::vector<Segment> segments;

  bool empty() const { return segments.empty(); }

  double distance(const Vec2& p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& s : segments) d = std::min(d, point_segment_distance(p, s.a, s.b));
    return d;
  }
};

/// Parts of [a, b] with signed distance strictly below s (the segment minus the
/// inner parallel set). The superlevel set of a concave function on a segment
/// is an interval, so at most two pieces remain.
inline std::vector<Segment> clip_outside_inner_set(const ConvexDomain& domain, const Vec2& a,
                                                   const Vec2& b, double s) {
  auto f = [&](double t) { return domain.signed_distance(a + t * (b - a)); };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (f(m1) < f(m2)) lo = m1;
    else hi = m2;
  }
  const double tstar = 0.5 * (lo + hi);
  if (f(tstar) < s) return {{a, b}};
  auto crossing = [&](double inside_t, double outside_t) {
    for (int i = 0; i < 200; ++i) {
      const double m = 0.5 * (inside_t + outside_t);
      if (m == inside_t || m == outside_t) break;
      if (f(m) >= s) inside_t = m;
      else outside_t = m;
    }
    return outside_t;
  };
  std::vector<Segment> out;
  if (f(0.0) < s) out.push_back({a, a + crossing(tstar, 0.0) * (b - a)});
  if (f(1.0) < s) out.push_back({a + crossing(tstar, 1.0) * (b - a), b});
  return out;
}

struct RegionFlags {
  bool in_Dj = false;
  bool in_Djk = false;
  bool in_Kj = false;
  bool in_Kj_tilde = false;
  bool in_Kj_hat = false;
};

/// Membership of p in D_j, D_{j,k}, K_j, K~_j and K^_j. `outside_anchor` is the
/// segment set Gamma_0 \ D_j.
inline RegionFlags region_classify(const ConvexDomain& domain, const SegmentSet& outside_anchor,
                                   const RegionIndex& idx, const Vec2& p) {
  RegionFlags f;
  const double sd = domain.signed_distance(p);
  f.in_Dj = sd > 0.0 && sd >= idx.d_threshold();
  f.in_Djk = sd > 0.0 && sd >= idx.djk_threshold();
  const double da = outside_anchor.distance(p);
  f.in_Kj = da < idx.k_radius();
  f.in_Kj_tilde = da < idx.k_tilde_radius();
  f.in_Kj_hat = da < idx.k_hat_radius();
  return f;
}

// ---------------------------------------------------------------------------
// Convex hull.

class ConvexHull {
 public:
  ConvexHull() = default;
  explicit ConvexHull(std::vector<Vec2> ccw) : v_(std::move(ccw)) {}

  const std::vector<Vec2>& vertices() const { return v_; }

  /// Signed distance to the hull boundary: positive inside, negative outside.
  /// Degenerate hulls (point or segment) have empty interior.
  double margin(const Vec2& p) const {
    if (v_.empty()) return -std::numeric_limits<double>::infinity();
    if (v_.size() == 1) return -(p - v_[0]).norm();
    if (v_.size() == 2) return -point_segment_distance(p, v_[0], v_[1]);
    bool inside = true;
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v_.size(); ++i) {
      const Vec2& a = v_[i];
      const Vec2& b = v_[(i + 1) % v_.size()];
      if (cross(b - a, p - a) < 0.0) inside = false;
      d = std::min(d, point_segment_distance(p, a, b));
    }
    return inside ? d : -d;
  }

  bool contains(const Vec2& p, double tol = 1e-12) const { return margin(p) >= -tol; }

  double area() const {
    double s = 0.0;
    for (std::size_t i = 0; i < v_.size(); ++i) s += cross(v_[i], v_[(i + 1) % v_.size()]);
    return 0.5 * s;
  }

 private:
  std::vector<Vec2> v_;
};

/// Andrew's monotone chain; collinear boundary points are dropped.
inline ConvexHull convex_hull(std::span<const Vec2> points) {
  std::vector<Vec2> p(points.begin(), points.end());
  std::sort(p.begin(), p.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  p.erase(std::unique(p.begin(), p.end(), [](const Vec2& a, const Vec2& b) { return a == b; }), p.end());
  if (p.size() < 3) return ConvexHull(p);
  std::vector<Vec2> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0.0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0.0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return ConvexHull(std::move(h));
}

}  // namespace brakke
