#pragma once

// Boundary damping eta_j: a mollified distance to the frozen near-boundary part
// of the initial network, pushed through exp and a saturating glue profile.

#include "brakke/core.hpp"
#include "brakke/geometry.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <unordered_map>
#include <vector>

namespace brakke {

/// Glue profile: identity on (0, 1/2], 1 on [3/2, inf), and the quartic with
/// psi' = 1 - 3s^2 + 2s^3 (s = t - 1/2) in between. C^2, 0 <= psi' <= 1,
/// |psi''| <= 3/2, t/2 <= psi <= t on [1/2, 3/2].
inline double glue_psi(double t) {
  if (!(t > 0.0)) throw DomainError("glue profile is defined for t > 0");
  if (t <= 0.5) return t;
  if (t >= 1.5) return 1.0;
  const double s = t - 0.5;
  return 0.5 + s - s * s * s + 0.5 * s * s * s * s;
}

inline double glue_psi_d1(double t) {
  if (t <= 0.5) return 1.0;
  if (t >= 1.5) return 0.0;
  const double s = t - 0.5;
  return 1.0 - 3.0 * s * s + 2.0 * s * s * s;
}

inline double glue_psi_d2(double t) {
  if (t <= 0.5 || t >= 1.5) return 0.0;
  const double s = t - 0.5;
  return -6.0 * s + 6.0 * s * s;
}

namespace detail {

// Boundary pieces of a union of stadiums (r-neighbourhoods of segments).
struct OffsetLine {
  Vec2 p0, p1;
};
struct CapArc {
  Vec2 center;
  Vec2 facing;  // zero for a full circle
};

inline bool on_cap(const CapArc& c, const Vec2& q) {
  return c.facing.isZero() || (q - c.center).dot(c.facing) >= -1e-15;
}

}  // namespace detail

/// Exact distance to the complement of the open r-neighbourhood of a segment set.
class NeighbourhoodComplementDistance {
 public:
  NeighbourhoodComplementDistance() = default;
  NeighbourhoodComplementDistance(SegmentSet set, double radius) : set_(std::move(set)), r_(radius) {
    for (const auto& s : set_.segments) {
      const Vec2 d = s.b - s.a;
      const double len = d.norm();
      if (len > 0.0) {
        const Vec2 n = perp(d / len);
        lines_.push_back({s.a + r_ * n, s.b + r_ * n});
        lines_.push_back({s.a - r_ * n, s.b - r_ * n});
        caps_.push_back({s.a, -d / len});
        caps_.push_back({s.b, d / len});
      } else {
        caps_.push_back({s.a, Vec2::Zero()});
      }
    }
    build_corners();
  }

  double radius() const { return r_; }
  const SegmentSet& segments() const { return set_; }

  double operator()(const Vec2& x) const {
    const double dx = set_.distance(x);
    if (!(dx < r_)) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](const Vec2& q) {
      const double d = (q - x).norm();
      if (d < best && uncovered(q)) best = d;
    };
    for (const auto& l : lines_) {
      const Vec2 e = l.p1 - l.p0;
      const double t = (x - l.p0).dot(e) / e.squaredNorm();
      if (t >= 0.0 && t <= 1.0) consider(l.p0 + t * e);
    }
    for (const auto& c : caps_) {
      Vec2 v = x - c.center;
      const double vn = v.norm();
      if (vn > 1e-15) {
        const Vec2 q = c.center + r_ * v / vn;
        if (detail::on_cap(c, q)) consider(q);
      } else {
        for (int k = 0; k < 16; ++k) {
          const double th = 2.0 * kPi * k / 16.0;
          const Vec2 q = c.center + r_ * Vec2(std::cos(th), std::sin(th));
          if (detail::on_cap(c, q)) consider(q);
        }
      }
    }
    for (const auto& q : corners_) consider(q);
    // The nearest complement point always lies on one of the candidates above;
    // the lower bound r - dist(x, set) guards against rounding-level misses.
    if (!std::isfinite(best)) best = r_ - dx;
    return std::max(best, r_ - dx);
  }

 private:
  SegmentSet set_;
  double r_ = 0.0;
  std::vector<detail::OffsetLine> lines_;
  std::vector<detail::CapArc> caps_;
  std::vector<Vec2> corners_;

  bool uncovered(const Vec2& q) const { return set_.distance(q) >= r_ * (1.0 - 1e-12); }

  void build_corners() {
    std::vector<Vec2> pts;
    auto seg_seg = [&](const detail::OffsetLine& a, const detail::OffsetLine& b) {
      const Vec2 r = a.p1 - a.p0, s = b.p1 - b.p0;
      const double den = cross(r, s);
      if (den == 0.0) return;
      const double t = cross(b.p0 - a.p0, s) / den;
      const double u = cross(b.p0 - a.p0, r) / den;
      if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) pts.push_back(a.p0 + t * r);
    };
    auto seg_cap = [&](const detail::OffsetLine& a, const detail::CapArc& c) {
      const Vec2 d = a.p1 - a.p0, f = a.p0 - c.center;
      const double A = d.squaredNorm(), B = 2.0 * f.dot(d), C = f.squaredNorm() - r_ * r_;
      const double disc = B * B - 4.0 * A * C;
      if (disc < 0.0) return;
      for (double sgn : {-1.0, 1.0}) {
        const double t = (-B + sgn * std::sqrt(disc)) / (2.0 * A);
        if (t < 0.0 || t > 1.0) continue;
        const Vec2 q = a.p0 + t * d;
        if (detail::on_cap(c, q)) pts.push_back(q);
      }
    };
    auto cap_cap = [&](const detail::CapArc& a, const detail::CapArc& b) {
      const Vec2 d = b.center - a.center;
      const double dist = d.norm();
      if (dist == 0.0 || dist > 2.0 * r_) return;
      const double h = std::sqrt(std::max(0.0, r_ * r_ - 0.25 * dist * dist));
      const Vec2 mid = a.center + 0.5 * d;
      const Vec2 n = perp(d / dist);
      for (double sgn : {-1.0, 1.0}) {
        const Vec2 q = mid + sgn * h * n;
        if (detail::on_cap(a, q) && detail::on_cap(b, q)) pts.push_back(q);
      }
    };
    for (std::size_t i = 0; i < lines_.size(); ++i)
      for (std::size_t k = i + 1; k < lines_.size(); ++k) seg_seg(lines_[i], lines_[k]);
    for (const auto& l : lines_)
      for (const auto& c : caps_) seg_cap(l, c);
    for (std::size_t i = 0; i < caps_.size(); ++i)
      for (std::size_t k = i + 1; k < caps_.size(); ++k) cap_cap(caps_[i], caps_[k]);
    for (const auto& q : pts)
      if (uncovered(q)) corners_.push_back(q);
  }
};

/// eta_j(x) = psi(exp(-j^{1/4} (d_j(x) - j^{-1/4}))), where d_j is the bump
/// mollification (radius j^{-1/4}) of the distance to the complement of the
/// 2 j^{-1/8}-neighbourhood of Gamma_0 \ D_j. The anchor is frozen at t = 0.
class DampingField {
 public:
  DampingField() = default;

  /// `initial_network` holds the segments of Gamma_0; `divisions` is the number
  /// of mollifier quadrature nodes per radius.
  DampingField(const ConvexDomain& domain, const SegmentSet& initial_network, double j, int divisions = 24)
      : j_(j), divisions_(divisions) {
    if (!(j >= 1.0)) throw ParameterError("damping scale j must be >= 1");
    if (divisions < 1) throw ParameterError("mollifier divisions must be positive");
    const RegionIndex idx{j, 0};
    SegmentSet anchor;
    for (const auto& s : initial_network.segments)
      for (const auto& piece : clip_outside_inner_set(domain, s.a, s.b, idx.d_threshold()))
        anchor.segments.push_back(piece);
    rho_ = 1.0 / idx.quarter_root();
    raw_ = NeighbourhoodComplementDistance(std::move(anchor), 2.0 / idx.eighth_root());
    build_mollifier();
  }

  double j() const { return j_; }
  double mollification_radius() const { return rho_; }
  double outer_radius() const { return raw_.radius(); }
  const SegmentSet& anchor() const { return raw_.segments(); }

  /// d^_j(x) = dist(x, R^2 \ (Gamma_0 \ D_j)_{2 j^{-1/8}}).
  double raw_distance(const Vec2& x) const { return raw_(x); }

  /// d_j(x) = (phi_rho * d^_j)(x) on a tensor grid over B_rho(x).
  double mollified_distance(const Vec2& x) const {
    if (raw_.segments().empty()) return 0.0;
    if (raw_.segments().distance(x) >= raw_.radius() + rho_) return 0.0;
    double acc = 0.0;
    for (const auto& node : nodes_) acc += node.weight * raw_(x + node.offset);
    return acc;
  }

  /// Memoized per point: frozen points barely move between epochs, and each
  /// mollified distance costs a full quadrature.
  double eta(const Vec2& x) const {
    const std::uint64_t key = hash_point(x);
    if (const auto it = cache_.find(key); it != cache_.end() && it->second.first == x) return it->second.second;
    const double v = eta_from_distance(mollified_distance(x));
    if (cache_.size() >= kCacheLimit) cache_.clear();
    cache_[key] = {x, v};
    return v;
  }

  double eta_from_distance(double d) const {
    const double q = std::pow(j_, 0.25);
    const double t = std::exp(-q * (d - 1.0 / q));
    return t > 0.0 ? glue_psi(t) : 0.0;  // psi(t) = t near 0
  }

 private:
  struct Node {
    Vec2 offset;
    double weight;
  };
  double j_ = 1.0;
  int divisions_ = 8;
  double rho_ = 1.0;
  NeighbourhoodComplementDistance raw_;
  std::vector<Node> nodes_;
  static constexpr std::size_t kCacheLimit = 1u << 20;
  mutable std::unordered_map<std::uint64_t, std::pair<Vec2, double>> cache_;

  static std::uint64_t hash_point(const Vec2& x) {
    std::uint64_t a, b;
    std::memcpy(&a, &x.x(), sizeof a);
    std::memcpy(&b, &x.y(), sizeof b);
    return a * 0x9e3779b97f4a7c15ULL ^ (b + 0x7f4a7c159e3779b9ULL + (a << 6) + (a >> 2));
  }

  void build_mollifier() {
    const int m = divisions_;
    const double h = rho_ / m;
    double total = 0.0;
    for (int a = -m; a <= m; ++a)
      for (int b = -m; b <= m; ++b) {
        const double w2 = (sq(a) + sq(b)) / sq(static_cast<double>(m));
        if (w2 >= 1.0) continue;
        const double w = std::exp(1.0 / (w2 - 1.0));
        nodes_.push_back({Vec2(a * h, b * h), w});
        total += w;
      }
    for (auto& n : nodes_) n.weight /= total;
  }
};

}  // namespace brakke
