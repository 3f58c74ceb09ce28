#include "brakke/kernel.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace brakke;

namespace {

// Radial integral of Phi over the unit ball by composite Simpson.
template <int Dim>
double radial_integral(const SmoothingKernel<Dim>& k, int n = 200000) {
  const double sphere = Dim == 2 ? 2 * kPi : 4 * kPi;
  const double h = 1.0 / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double r = i * h;
    typename SmoothingKernel<Dim>::Vec x = SmoothingKernel<Dim>::Vec::Zero();
    x[0] = r;
    const double f = k(x) * sphere * std::pow(r, Dim - 1);
    s += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return s * h / 3.0;
}

}  // namespace

TEST(MakeKernel, RejectsOutOfRangeEps) {
  EXPECT_THROW(make_kernel<2>(0.0), ParameterError);
  EXPECT_THROW(make_kernel<2>(1.0), ParameterError);
  EXPECT_THROW(make_kernel<3>(-0.1), ParameterError);
}

TEST(MakeKernel, NormalizationExamples) {
  EXPECT_NEAR(make_kernel<2>(0.05).normalization(), 1.0, 1e-9);
  EXPECT_GT(make_kernel<2>(0.5).normalization(), 1.0);
}

TEST(MakeKernel, IntegratesToOne) {
  for (double eps : {0.02, 0.05, 0.1, 0.3, 0.5}) {
    EXPECT_NEAR(radial_integral(make_kernel<2>(eps)), 1.0, 1e-8) << eps;
    EXPECT_NEAR(radial_integral(make_kernel<3>(eps)), 1.0, 1e-8) << eps;
  }
}

TEST(Eval, PeakAndSupport) {
  const auto k = make_kernel<2>(0.1);
  EXPECT_DOUBLE_EQ(k(Vec2::Zero()), k.normalization() / (2 * kPi * 0.01));
  EXPECT_EQ(k(Vec2(1, 0)), 0.0);
  EXPECT_TRUE(k.grad(Vec2(0, 1.2)).isZero());
  const auto k3 = make_kernel<3>(0.1);
  EXPECT_NEAR(k3(Eigen::Vector3d::Zero()), k3.normalization() * std::pow(2 * kPi * 0.01, -1.5), 1e-9);
}

TEST(Eval, GradientAndHessianMatchFiniteDifferences) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  const double eps = 0.3;
  const auto k = make_kernel<2>(eps);
  const double h = 1e-6;
  for (int i = 0; i < 50; ++i) {
    const Vec2 x(u(rng), u(rng));
    if (x.norm() >= 0.98) continue;
    const Vec2 g = k.grad(x);
    const Vec2 fd((k(x + Vec2(h, 0)) - k(x - Vec2(h, 0))) / (2 * h), (k(x + Vec2(0, h)) - k(x - Vec2(0, h))) / (2 * h));
    EXPECT_LT((g - fd).norm(), 1e-5 * std::max(g.norm(), 1e-8)) << x.transpose();
    const Mat2 H = k.hess(x);
    Mat2 fdH;
    fdH.col(0) = (k.grad(x + Vec2(h, 0)) - k.grad(x - Vec2(h, 0))) / (2 * h);
    fdH.col(1) = (k.grad(x + Vec2(0, h)) - k.grad(x - Vec2(0, h))) / (2 * h);
    EXPECT_LT((H - fdH).norm(), 1e-5 * std::max(H.norm(), 1e-8));
  }
  const auto k3 = make_kernel<3>(0.2);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector3d x(u(rng), u(rng), u(rng));
    if (x.norm() >= 0.98) continue;
    const auto g = k3.grad(x);
    Eigen::Vector3d fd;
    for (int c = 0; c < 3; ++c) {
      Eigen::Vector3d e = Eigen::Vector3d::Zero();
      e[c] = h;
      fd[c] = (k3(x + e) - k3(x - e)) / (2 * h);
    }
    EXPECT_LT((g - fd).norm(), 1e-5 * std::max(g.norm(), 1e-12));
  }
}

TEST(Eval, EvennessAndMonotoneDecay) {
  const auto k = make_kernel<2>(0.2);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 100; ++i) {
    const Vec2 x(u(rng), u(rng));
    EXPECT_EQ(k(x), k(Vec2(-x)));
    EXPECT_TRUE(k.grad(x) == Vec2(-k.grad(Vec2(-x))));
  }
  double prev = k(Vec2::Zero());
  for (int i = 1; i <= 1000; ++i) {
    const double v = k(Vec2(i / 1000.0, 0));
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Eval, GradientBoundWithFrozenTailConstant) {
  for (double eps = 0.02; eps < 1.0; eps += 0.02) {
    const auto k = make_kernel<2>(eps);
    const auto k3 = make_kernel<3>(eps);
    for (int i = 1; i < 2000; ++i) {
      const double r = i / 2000.0;
      const double tail = r >= 0.5 ? std::exp(-1.0 / eps) : 0.0;
      const Vec2 x(r, 0);
      EXPECT_LE(k.grad(x).norm(), r / (eps * eps) * k(x) + SmoothingKernel<2>::kGradientTailConstant * tail + 1e-12 * k.grad(x).norm())
          << eps << " " << r;
      const Eigen::Vector3d y(r, 0, 0);
      EXPECT_LE(k3.grad(y).norm(), r / (eps * eps) * k3(y) + SmoothingKernel<3>::kGradientTailConstant * tail + 1e-12 * k3.grad(y).norm())
          << eps << " " << r;
    }
  }
}

TEST(RadialCutoff, ScanBounds) {
  const auto b = scan_cutoff_bounds();
  // Quintic smoothstep over [1/2, 1]: max slope 15/4, max curvature 40/sqrt(3) ~ 23.09.
  EXPECT_NEAR(b.max_gradient, 3.75, 1e-6);
  EXPECT_NEAR(b.max_hessian, 40.0 / std::sqrt(3.0), 1e-3);
  EXPECT_EQ(RadialCutoff::value(0.3), 1.0);
  EXPECT_EQ(RadialCutoff::value(1.0), 0.0);
}
