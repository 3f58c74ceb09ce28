#pragma once

// Localized Gaussian convolution kernel Phi_eps = c(eps) psi(x) G_eps(x) with
// compact support in the unit ball, and its closed-form derivatives.

#include "brakke/core.hpp"

#include <Eigen/Core>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <cmath>

namespace brakke {

/// Radial cut-off profile: 1 on [0, 1/2], 0 on [1, inf), quintic smoothstep in
/// between.
struct RadialCutoff {
  static double value(double r) {
    if (r <= 0.5) return 1.0;
    if (r >= 1.0) return 0.0;
    const double u = 2.0 * r - 1.0;
    return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
  }
  static double d1(double r) {
    if (r <= 0.5 || r >= 1.0) return 0.0;
    const double u = 2.0 * r - 1.0;
    return -60.0 * u * u * sq(1.0 - u);
  }
  static double d2(double r) {
    if (r <= 0.5 || r >= 1.0) return 0.0;
    const double u = 2.0 * r - 1.0;
    return -240.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
  }
};

template <int Dim>
class SmoothingKernel {
  static_assert(Dim == 2 || Dim == 3, "kernel is defined for ambient dimension 2 or 3");

 public:
  using Vec = Eigen::Matrix<double, Dim, 1>;
  using Mat = Eigen::Matrix<double, Dim, Dim>;

  /// Empirical constants C with |grad Phi| <= |x|/eps^2 Phi + C 1_{1/2<=|x|<=1} exp(-1/eps),
  /// from a dense scan over eps in (0, 1) at step 1/400 (maxima 13.45 and 21.83).
  static constexpr double kGradientTailConstant = Dim == 2 ? 14.0 : 22.0;

  explicit SmoothingKernel(double eps) : eps_(eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("kernel eps must lie in (0, 1)");
    gauss_norm_ = std::pow(2.0 * kPi * eps * eps, -0.5 * Dim);
    c_eps_ = 1.0 / truncated_mass();
  }

  double eps() const { return eps_; }
  static constexpr int dim() { return Dim; }
  double normalization() const { return c_eps_; }

  /// Phi_eps(0).
  double peak() const { return c_eps_ * gauss_norm_; }

  /// Untruncated Gaussian G_eps(x).
  double gaussian(double r2) const { return gauss_norm_ * std::exp(-0.5 * r2 / (eps_ * eps_)); }

  double operator()(const Vec& x) const {
    const double r2 = x.squaredNorm();
    if (r2 >= 1.0) return 0.0;
    return c_eps_ * RadialCutoff::value(std::sqrt(r2)) * gaussian(r2);
  }

  Vec grad(const Vec& x) const {
    const double r2 = x.squaredNorm();
    if (r2 >= 1.0 || r2 == 0.0) return Vec::Zero();
    const double r = std::sqrt(r2);
    const double g = gaussian(r2);
    const double psi = RadialCutoff::value(r);
    const double dpsi = RadialCutoff::d1(r);
    return c_eps_ * g * (dpsi / r - psi / (eps_ * eps_)) * x;
  }

  Mat hess(const Vec& x) const {
    const double r2 = x.squaredNorm();
    const double e2 = eps_ * eps_;
    if (r2 >= 1.0) return Mat::Zero();
    const double g = gaussian(r2);
    if (r2 == 0.0) return -c_eps_ * g / e2 * Mat::Identity();
    const double r = std::sqrt(r2);
    const Vec xh = x / r;
    const double psi = RadialCutoff::value(r);
    const double d1 = RadialCutoff::d1(r);
    const double d2 = RadialCutoff::d2(r);
    const Mat I = Mat::Identity();
    const Mat hg = (x * x.transpose() / (e2 * e2) - I / e2) * g;
    const Vec gg = -x / e2 * g;
    const Mat hpsi = d2 * xh * xh.transpose() + (d1 / r) * (I - xh * xh.transpose());
    const Vec gpsi = d1 * xh;
    return c_eps_ * (psi * hg + gpsi * gg.transpose() + gg * gpsi.transpose() + g * hpsi);
  }

  /// Radius beyond which the Gaussian factor drops below `rel_tail` times its
  /// peak, capped at the support radius.
  double truncation_radius(double rel_tail) const {
    return std::min(1.0, eps_ * std::sqrt(2.0 * std::log(1.0 / rel_tail)));
  }

 private:
  double eps_;
  double gauss_norm_;
  double c_eps_ = 1.0;

  // Integral of psi * G over the unit ball: closed form on [0, 1/2] (chi
  // distribution), adaptive Gauss-Kronrod on the transition shell.
  double truncated_mass() const {
    const double a = 0.5 / eps_;
    double inner;
    if constexpr (Dim == 2) {
      inner = -std::expm1(-0.5 * a * a);
    } else {
      inner = boost::math::erf(a / std::sqrt(2.0)) - std::sqrt(2.0 / kPi) * a * std::exp(-0.5 * a * a);
    }
    const double sphere = Dim == 2 ? 2.0 * kPi : 4.0 * kPi;
    auto shell = [&](double r) {
      return RadialCutoff::value(r) * gaussian(r * r) * sphere * std::pow(r, Dim - 1);
    };
    double err = 0.0;
    const double outer =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(shell, 0.5, 1.0, 20, 1e-12, &err);
    return inner + outer;
  }
};

template <int Dim>
SmoothingKernel<Dim> make_kernel(double eps) {
  return SmoothingKernel<Dim>(eps);
}

/// Maximum |grad psi| and ||hess psi|| of the radial cut-off found by a dense
/// scan of r in [1/2, 1]. The Hessian norm is the larger of |psi''| and |psi'/r|.
struct CutoffBounds {
  double max_gradient;
  double max_hessian;
};

inline CutoffBounds scan_cutoff_bounds(int samples = 100000) {
  CutoffBounds b{0.0, 0.0};
  for (int i = 0; i <= samples; ++i) {
    const double r = 0.5 + 0.5 * i / samples;
    b.max_gradient = std::max(b.max_gradient, std::abs(RadialCutoff::d1(r)));
    b.max_hessian = std::max({b.max_hessian, std::abs(RadialCutoff::d2(r)), std::abs(RadialCutoff::d1(r) / r)});
  }
  return b;
}

}  // namespace brakke
