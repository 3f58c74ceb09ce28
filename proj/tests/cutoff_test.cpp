#include "brakke/cutoff.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace brakke;

namespace {

// Distance to the complement of the open r-neighbourhood by scanning circles
// of growing radius around x.
double sampled_complement_distance(const SegmentSet& s, double r, const Vec2& x, double step = 2e-4) {
  if (!(s.distance(x) < r)) return 0.0;
  for (double rho = step; rho < 2 * r + step; rho += step)
    for (int k = 0; k < 2048; ++k) {
      const double th = 2 * kPi * k / 2048;
      if (s.distance(x + rho * Vec2(std::cos(th), std::sin(th))) >= r) return rho;
    }
  return 2 * r;
}

SegmentSet polyline_segments(const std::vector<Vec2>& p) {
  SegmentSet s;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) s.segments.push_back({p[i], p[i + 1]});
  return s;
}

}  // namespace

TEST(GluePsi, Examples) {
  EXPECT_DOUBLE_EQ(glue_psi(0.25), 0.25);
  EXPECT_DOUBLE_EQ(glue_psi(2.0), 1.0);
  const double v = glue_psi(1.0);
  EXPECT_GE(v, 0.5);
  EXPECT_LE(v, 1.0);
  EXPECT_THROW(glue_psi(0.0), DomainError);
  EXPECT_THROW(glue_psi(-1.0), DomainError);
}

TEST(GluePsi, DenseScanOfConstraints) {
  const double h = 1e-6;
  for (int i = 1; i <= 200000; ++i) {
    const double t = 2.0 * i / 200000;
    const double p = glue_psi(t), d1 = glue_psi_d1(t), d2 = glue_psi_d2(t);
    EXPECT_GE(d1, 0.0);
    EXPECT_LE(d1, 1.0);
    EXPECT_LE(std::abs(d2), 2.0);
    if (t >= 0.5 && t <= 1.5) {
      EXPECT_GE(p, 0.5 * t - 1e-15);
      EXPECT_LE(p, t + 1e-15);
    }
    if (t > 2 * h) {
      EXPECT_NEAR((glue_psi(t + h) - glue_psi(t - h)) / (2 * h), d1, 1e-8);
      EXPECT_NEAR((glue_psi_d1(t + h) - glue_psi_d1(t - h)) / (2 * h), d2, 1e-5);
    }
  }
}

TEST(RawDistance, MatchesSamplingOracle) {
  const SegmentSet s = polyline_segments({{-0.6, 0.0}, {0.0, 0.05}, {0.3, 0.4}, {0.35, 0.42}});
  const double r = 0.25;
  const NeighbourhoodComplementDistance d(s, r);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.9, 0.7);
  for (int i = 0; i < 60; ++i) {
    const Vec2 x(u(rng), u(rng));
    EXPECT_NEAR(d(x), sampled_complement_distance(s, r, x), 5e-4) << x.transpose();
  }
  EXPECT_EQ(d({5.0, 5.0}), 0.0);
}

TEST(RawDistance, LipschitzAndBounded) {
  const SegmentSet s = polyline_segments({{-0.5, -0.5}, {0.5, 0.5}, {0.5, -0.2}});
  const double r = 0.3;
  const NeighbourhoodComplementDistance d(s, r);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.9, 0.9), v(-0.05, 0.05);
  for (int i = 0; i < 5000; ++i) {
    const Vec2 x(u(rng), u(rng));
    const Vec2 y = x + Vec2(v(rng), v(rng));
    EXPECT_LE(std::abs(d(x) - d(y)), (x - y).norm() + 1e-12);
    // Inside a bent set the complement can be farther than r; r - dist(x, set)
    // is the general lower bound.
    EXPECT_GE(d(x), r - s.distance(x) - 1e-12);
    EXPECT_GE(d(x), 0.0);
  }
}

TEST(DampingField, ChordAnchorExamples) {
  const auto dom = ConvexDomain::disk(Vec2::Zero(), 1.0);
  const SegmentSet chord = polyline_segments({{-1, 0}, {1, 0}});
  const double j = 1e8;
  const DampingField f(dom, chord, j);
  const RegionIndex idx{j, 0};
  // Anchor is the chord minus D_j: two end pieces of length 2 j^{-1/4}.
  ASSERT_EQ(f.anchor().segments.size(), 2u);
  EXPECT_NEAR(f.anchor().segments[0].b.x(), -1.0 + idx.d_threshold(), 1e-12);
  EXPECT_DOUBLE_EQ(f.mollification_radius(), 1.0 / idx.quarter_root());
  EXPECT_DOUBLE_EQ(f.outer_radius(), 2.0 / idx.eighth_root());
  // Far from the anchor the field is identically 1.
  EXPECT_EQ(f.eta({0.0, 0.9}), 1.0);
  EXPECT_EQ(f.mollified_distance({0.0, 0.9}), 0.0);
}

TEST(DampingField, MollificationBracketsAndRefinement) {
  const auto dom = ConvexDomain::disk(Vec2::Zero(), 1.0);
  const SegmentSet chord = polyline_segments({{-1, 0}, {1, 0}});
  const double j = 32;
  const DampingField coarse(dom, chord, j);
  const DampingField fine(dom, chord, j, 96);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const NeighbourhoodComplementDistance raw(coarse.anchor(), coarse.outer_radius());
  const double rho = coarse.mollification_radius();
  double worst = 0.0;
  for (int i = 0; i < 150; ++i) {
    const Vec2 x(u(rng), u(rng));
    const double m = coarse.mollified_distance(x);
    double lo = 1e300, hi = -1e300;
    for (int a = -10; a <= 10; ++a)
      for (int b = -10; b <= 10; ++b) {
        const Vec2 o(a * rho / 10, b * rho / 10);
        if (o.norm() >= rho) continue;
        lo = std::min(lo, raw(x + o));
        hi = std::max(hi, raw(x + o));
      }
    EXPECT_GE(m, lo - 1e-3);
    EXPECT_LE(m, hi + 1e-3);
    const double mf = fine.mollified_distance(x);
    if (mf > 1e-3) worst = std::max(worst, std::abs(m - mf) / mf);
    EXPECT_DOUBLE_EQ(coarse.eta(x), glue_psi(std::exp(-std::pow(j, 0.25) * (m - std::pow(j, -0.25)))));
  }
  RecordProperty("max_relative_refinement_error", std::to_string(worst));
  EXPECT_LT(worst, 1e-4);
}

TEST(DampingField, LemmaPropertiesOneAndThree) {
  const auto dom = ConvexDomain::disk(Vec2::Zero(), 1.0);
  const SegmentSet chord = polyline_segments({{-1, 0}, {1, 0}});
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double j : {8.0, 16.0, 32.0, 64.0}) {
    const DampingField f(dom, chord, j);
    const RegionIndex idx{j, 0};
    const double hstep = 1e-6;
    for (int i = 0; i < 1000; ++i) {
      const Vec2 x(u(rng), u(rng));
      const double e = f.eta(x);
      EXPECT_GT(e, 0.0);
      EXPECT_LE(e, 1.0);
      if (f.anchor().distance(x) >= idx.k_hat_radius()) {
        EXPECT_EQ(e, 1.0);
      }
      const Vec2 g((f.eta(x + Vec2(hstep, 0)) - f.eta(x - Vec2(hstep, 0))) / (2 * hstep),
                   (f.eta(x + Vec2(0, hstep)) - f.eta(x - Vec2(0, hstep))) / (2 * hstep));
      EXPECT_LE(g.norm(), 2.0 * idx.quarter_root() * e * (1 + 1e-3) + 1e-9) << j << " " << x.transpose();
    }
  }
}

TEST(RawDistance, BoundedByRadiusForStraightSet) {
  const SegmentSet s = polyline_segments({{-0.5, 0.1}, {0.5, -0.1}});
  const NeighbourhoodComplementDistance d(s, 0.2);
  for (int i = -100; i <= 100; ++i)
    for (int k = -30; k <= 30; ++k) EXPECT_LE(d({i / 100.0, k / 100.0}), 0.2 + 1e-15);
  EXPECT_NEAR(d({0.0, 0.0}), 0.2, 1e-15);
}
