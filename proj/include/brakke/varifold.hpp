#pragma once

// Discrete curve varifolds: midpoint quadrature samples (x, tau, w) with the
// weight, first variation and kernel-smoothed curvature computed from them.

#include "brakke/core.hpp"
#include "brakke/kernel.hpp"
#include "brakke/partition.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <unordered_map>
#include <vector>

namespace brakke {

struct VarifoldSample {
  Vec2 x;
  Vec2 tau;
  double w;
};

struct VarifoldSlice {
  std::vector<VarifoldSample> samples;
  std::uint64_t source_hash = 0;

  double mass() const {
    double m = 0.0;
    for (const auto& s : samples) m += s.w;
    return m;
  }
};

/// FNV-1a over the network's coordinates, topology and labels.
inline std::uint64_t network_hash(const LabeledNetwork& net) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& n : net.nodes) {
    mix(n.pos.data(), 2 * sizeof(double));
    mix(&n.kind, sizeof(n.kind));
  }
  for (const auto& e : net.edges) {
    mix(&e.tail, sizeof(e.tail));
    mix(&e.head, sizeof(e.head));
    mix(&e.left, sizeof(e.left));
    mix(&e.right, sizeof(e.right));
    for (const auto& p : e.interior) mix(p.data(), 2 * sizeof(double));
  }
  return h;
}

/// One sample at the midpoint of every piece after splitting each polyline
/// segment into ceil(length / h_quad) equal parts.
inline VarifoldSlice slice(const LabeledNetwork& net, double h_quad) {
  if (!(h_quad > 0.0)) throw ParameterError("h_quad must be positive");
  VarifoldSlice s;
  s.source_hash = network_hash(net);
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto p = net.polyline(e);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      const Vec2 d = p[i + 1] - p[i];
      const double len = d.norm();
      if (len == 0.0) continue;
      const auto pieces = std::max(1, static_cast<int>(std::ceil(len / h_quad - 1e-12)));
      const Vec2 tau = d / len;
      const double w = len / pieces;
      for (int k = 0; k < pieces; ++k) s.samples.push_back({p[i] + ((k + 0.5) / pieces) * d, tau, w});
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Test fields.

struct ScalarField {
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> gradient;  // may be empty: central differences
  std::function<Mat2(const Vec2&)> hessian;   // optional
};

struct VectorField {
  std::function<Vec2(const Vec2&)> value;
  std::function<Mat2(const Vec2&)> jacobian;  // J(i, k) = d g_i / d x_k; may be empty
};

inline constexpr double kFiniteDifferenceStep = 1e-6;

inline Vec2 gradient_of(const ScalarField& f, const Vec2& x) {
  if (f.gradient) return f.gradient(x);
  const double h = kFiniteDifferenceStep;
  return {(f.value(x + Vec2(h, 0)) - f.value(x - Vec2(h, 0))) / (2 * h),
          (f.value(x + Vec2(0, h)) - f.value(x - Vec2(0, h))) / (2 * h)};
}

inline Mat2 jacobian_of(const VectorField& g, const Vec2& x) {
  if (g.jacobian) return g.jacobian(x);
  const double h = kFiniteDifferenceStep;
  Mat2 J;
  J.col(0) = (g.value(x + Vec2(h, 0)) - g.value(x - Vec2(h, 0))) / (2 * h);
  J.col(1) = (g.value(x + Vec2(0, h)) - g.value(x - Vec2(0, h))) / (2 * h);
  return J;
}

/// ||V||(phi) = sum w phi(x).
template <class Phi>
double mass(const VarifoldSlice& s, Phi&& phi) {
  double m = 0.0;
  for (const auto& q : s.samples) m += q.w * phi(q.x);
  return m;
}

/// delta V(g) = sum w tau . (grad g) tau.
inline double first_variation(const VarifoldSlice& s, const VectorField& g) {
  double acc = 0.0;
  for (const auto& q : s.samples) acc += q.w * q.tau.dot(jacobian_of(g, q.x) * q.tau);
  return acc;
}

/// delta(V, phi)(g) = sum w [phi tau . (grad g) tau + g . grad phi].
inline double weighted_first_variation(const VarifoldSlice& s, const ScalarField& phi, const VectorField& g) {
  double acc = 0.0;
  for (const auto& q : s.samples)
    acc += q.w * (phi.value(q.x) * q.tau.dot(jacobian_of(g, q.x) * q.tau) + g.value(q.x).dot(gradient_of(phi, q.x)));
  return acc;
}

/// (Phi * ||V||)(x).
inline double smoothed_weight(const VarifoldSlice& s, const SmoothingKernel<2>& k, const Vec2& x) {
  double acc = 0.0;
  for (const auto& q : s.samples) acc += q.w * k(Vec2(x - q.x));
  return acc;
}

/// (Phi * delta V)(x) = sum w (tau . grad Phi(x_i - x)) tau.
inline Vec2 smoothed_first_variation(const VarifoldSlice& s, const SmoothingKernel<2>& k, const Vec2& x) {
  Vec2 acc = Vec2::Zero();
  for (const auto& q : s.samples) acc += q.w * q.tau.dot(k.grad(Vec2(q.x - x))) * q.tau;
  return acc;
}

// ---------------------------------------------------------------------------
// Smoothed mean curvature.

/// Relative Gaussian tail below which kernel contributions are dropped.
inline constexpr double kKernelTruncation = 1e-18;

/// Lattice used for the outer convolution: spacing eps / refinement, anchored
/// at the origin, coordinate-box truncation at `radius`.
struct CurvatureLattice {
  double spacing;
  double radius;
  int reach;  // nodes per side within the truncation box

  static CurvatureLattice make(const SmoothingKernel<2>& k, int refinement) {
    if (refinement < 1) throw ParameterError("lattice refinement must be positive");
    CurvatureLattice l;
    l.spacing = k.eps() / refinement;
    l.radius = k.truncation_radius(kKernelTruncation);
    l.reach = static_cast<int>(std::floor(l.radius / l.spacing));
    return l;
  }
  /// True when the Gaussian factorizes over the truncation box (psi == 1 there).
  bool separable() const { return radius * std::sqrt(2.0) <= 0.5; }
};

/// h_eps(x) = -Phi * (Phi * delta V / (Phi * ||V|| + eps)) for one slice. The
/// inner field is accumulated on a dense lattice patch, then the outer
/// convolution is a lattice sum with cell area weights.
class CurvatureField {
 public:
  CurvatureField(const VarifoldSlice& s, const SmoothingKernel<2>& k, int refinement = 4)
      : kernel_(k), lat_(CurvatureLattice::make(k, refinement)) {
    build(s);
  }

  const CurvatureLattice& lattice() const { return lat_; }

  Vec2 operator()(const Vec2& x) const {
    if (nx_ == 0) return Vec2::Zero();
    const double h = lat_.spacing;
    const long ci = std::lround(x.x() / h), cj = std::lround(x.y() / h);
    const long i0 = std::max(ci - lat_.reach - 1, ox_), i1 = std::min(ci + lat_.reach + 1, ox_ + nx_ - 1);
    const long j0 = std::max(cj - lat_.reach - 1, oy_), j1 = std::min(cj + lat_.reach + 1, oy_ + ny_ - 1);
    if (i0 > i1 || j0 > j1) return Vec2::Zero();
    Vec2 acc = Vec2::Zero();
    if (lat_.separable()) {
      std::vector<double> wx(static_cast<std::size_t>(i1 - i0 + 1)), wy(static_cast<std::size_t>(j1 - j0 + 1));
      fill_weights(wx, i0, x.x());
      fill_weights(wy, j0, x.y());
      for (long j = j0; j <= j1; ++j) {
        const double b = wy[static_cast<std::size_t>(j - j0)];
        if (b == 0.0) continue;
        const Vec2* row = &field_[index(i0, j)];
        Vec2 racc = Vec2::Zero();
        for (long i = i0; i <= i1; ++i) racc += wx[static_cast<std::size_t>(i - i0)] * row[i - i0];
        acc += b * racc;
      }
      acc *= peak_;
    } else {
      for (long j = j0; j <= j1; ++j)
        for (long i = i0; i <= i1; ++i) {
          const Vec2 d(i * h - x.x(), j * h - x.y());
          if (std::abs(d.x()) > lat_.radius || std::abs(d.y()) > lat_.radius) continue;
          acc += kernel_(d) * field_[index(i, j)];
        }
    }
    return -h * h * acc;
  }

  /// The inner field F = Phi*deltaV / (Phi*||V|| + eps) at lattice node (i, j).
  Vec2 inner(long i, long j) const {
    if (i < ox_ || j < oy_ || i >= ox_ + nx_ || j >= oy_ + ny_) return Vec2::Zero();
    return field_[index(i, j)];
  }

 private:
  SmoothingKernel<2> kernel_;
  CurvatureLattice lat_;
  long ox_ = 0, oy_ = 0, nx_ = 0, ny_ = 0;
  double peak_ = 0.0;
  std::vector<Vec2> field_;

  std::size_t index(long i, long j) const { return static_cast<std::size_t>((j - oy_) * nx_ + (i - ox_)); }

  // 1-D Gaussian factors exp(-(i h - c)^2 / 2 eps^2), zero outside the box.
  void fill_weights(std::vector<double>& w, long i0, double c) const {
    const double h = lat_.spacing, inv = 0.5 / sq(kernel_.eps());
    for (std::size_t a = 0; a < w.size(); ++a) {
      const double d = (i0 + static_cast<long>(a)) * h - c;
      w[a] = std::abs(d) <= lat_.radius ? std::exp(-d * d * inv) : 0.0;
    }
  }

  void build(const VarifoldSlice& s) {
    if (s.samples.empty()) return;
    const double h = lat_.spacing;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& q : s.samples) {
      xmin = std::min(xmin, q.x.x());
      xmax = std::max(xmax, q.x.x());
      ymin = std::min(ymin, q.x.y());
      ymax = std::max(ymax, q.x.y());
    }
    ox_ = static_cast<long>(std::floor(xmin / h)) - lat_.reach - 1;
    oy_ = static_cast<long>(std::floor(ymin / h)) - lat_.reach - 1;
    nx_ = static_cast<long>(std::ceil(xmax / h)) + lat_.reach + 2 - ox_;
    ny_ = static_cast<long>(std::ceil(ymax / h)) + lat_.reach + 2 - oy_;
    const auto n = static_cast<std::size_t>(nx_ * ny_);
    std::vector<double> m(n, 0.0), fx(n, 0.0), fy(n, 0.0);
    peak_ = kernel_.peak();
    const double e2 = sq(kernel_.eps());
    std::vector<double> wx, wy;
    for (const auto& q : s.samples) {
      const long ci = std::lround(q.x.x() / h), cj = std::lround(q.x.y() / h);
      const long i0 = ci - lat_.reach - 1, i1 = ci + lat_.reach + 1;
      const long j0 = cj - lat_.reach - 1, j1 = cj + lat_.reach + 1;
      const double tx = q.tau.x(), ty = q.tau.y();
      if (lat_.separable()) {
        wx.assign(static_cast<std::size_t>(i1 - i0 + 1), 0.0);
        wy.assign(static_cast<std::size_t>(j1 - j0 + 1), 0.0);
        fill_weights(wx, i0, q.x.x());
        fill_weights(wy, j0, q.x.y());
        // grad Phi(x_i - y) = -(x_i - y) / eps^2 Phi, projected by tau tau^T.
        for (long j = j0; j <= j1; ++j) {
          const double b = wy[static_cast<std::size_t>(j - j0)] * peak_ * q.w;
          if (b == 0.0) continue;
          const double ty_dy = ty * (q.x.y() - j * h);
          const std::size_t row = index(i0, j);
          for (long i = i0; i <= i1; ++i) {
            const std::size_t a = static_cast<std::size_t>(i - i0);
            const double phi = b * wx[a];
            const double c = phi / e2 * (tx * (q.x.x() - i * h) + ty_dy);
            m[row + a] += phi;
            fx[row + a] -= c * tx;
            fy[row + a] -= c * ty;
          }
        }
      } else {
        for (long j = j0; j <= j1; ++j)
          for (long i = i0; i <= i1; ++i) {
            const Vec2 d(q.x.x() - i * h, q.x.y() - j * h);
            if (std::abs(d.x()) > lat_.radius || std::abs(d.y()) > lat_.radius) continue;
            const std::size_t idx = index(i, j);
            m[idx] += q.w * kernel_(d);
            const Vec2 g = kernel_.grad(d);
            const double c = q.w * (tx * g.x() + ty * g.y());
            fx[idx] += c * tx;
            fy[idx] += c * ty;
          }
      }
    }
    const double eps = kernel_.eps();
    field_.resize(n);
    for (std::size_t i = 0; i < n; ++i) field_[i] = Vec2(fx[i], fy[i]) / (m[i] + eps);
  }
};

/// Direct evaluation of h_eps(x) on the same lattice and truncation rule as
/// CurvatureField, with the inner field computed node by node from the
/// samples. Reference path for tests.
inline Vec2 smoothed_mean_curvature(const VarifoldSlice& s, const SmoothingKernel<2>& k, const Vec2& x,
                                    int refinement = 4) {
  const auto lat = CurvatureLattice::make(k, refinement);
  const double h = lat.spacing;
  const long ci = std::lround(x.x() / h), cj = std::lround(x.y() / h);
  std::vector<const VarifoldSample*> near;
  for (const auto& q : s.samples)
    if (std::abs(q.x.x() - x.x()) <= 2 * lat.radius + 2 * h && std::abs(q.x.y() - x.y()) <= 2 * lat.radius + 2 * h)
      near.push_back(&q);
  Vec2 acc = Vec2::Zero();
  for (long j = cj - lat.reach - 1; j <= cj + lat.reach + 1; ++j)
    for (long i = ci - lat.reach - 1; i <= ci + lat.reach + 1; ++i) {
      const Vec2 y(i * h, j * h);
      const Vec2 dxy = y - x;
      if (std::abs(dxy.x()) > lat.radius || std::abs(dxy.y()) > lat.radius) continue;
      double m = 0.0;
      Vec2 dv = Vec2::Zero();
      for (const auto* q : near) {
        const Vec2 d = q->x - y;
        if (std::abs(d.x()) > lat.radius || std::abs(d.y()) > lat.radius) continue;
        m += q->w * k(d);
        dv += q->w * q->tau.dot(k.grad(d)) * q->tau;
      }
      acc += k(dxy) * dv / (m + k.eps());
    }
  return -h * h * acc;
}

}  // namespace brakke
