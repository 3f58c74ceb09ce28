#include "brakke/geometry.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace brakke;

namespace {

double sampled_boundary_distance(const ConvexDomain& d, const Vec2& p, int n = 200000) {
  double best = 1e300;
  const double period = d.parameter_period();
  for (int i = 0; i < n; ++i) best = std::min(best, (d.boundary_point(period * i / n) - p).norm());
  // Polygon corners are the nearest points for much of the exterior.
  for (const auto& v : d.vertices()) best = std::min(best, (v - p).norm());
  return best;
}

}  // namespace

TEST(SignedDistance, UnitDiskExamples) {
  const auto d = ConvexDomain::disk(Vec2::Zero(), 1.0);
  EXPECT_DOUBLE_EQ(d.signed_distance({0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(d.signed_distance({1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(d.signed_distance({1.5, 0}), -0.5);
}

TEST(SignedDistance, MatchesDenseBoundarySampling) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  const std::vector<ConvexDomain> domains = {ConvexDomain::disk({0.1, -0.2}, 1.0),
                                             ConvexDomain::ellipse({0, 0}, 2.0, 1.0),
                                             regular_polygon_domain({0, 0}, 1.0, 48)};
  for (const auto& d : domains) {
    for (int i = 0; i < 40; ++i) {
      const Vec2 p(u(rng), u(rng));
      const double sd = d.signed_distance(p);
      // Dense sampling overestimates by at most the chord sagitta.
      EXPECT_NEAR(std::abs(sd), sampled_boundary_distance(d, p), 2e-7) << p.transpose();
      EXPECT_EQ(sd > 0.0, d.contains(p));
    }
    EXPECT_GT(d.signed_distance(d.center()), 0.0);
  }
}

TEST(OutwardNormal, Examples) {
  const auto disk = ConvexDomain::disk(Vec2::Zero(), 1.0);
  EXPECT_TRUE(disk.outward_normal({1, 0}).isApprox(Vec2(1, 0), 1e-14));
  EXPECT_TRUE(disk.outward_normal({0, -0.9}).isApprox(Vec2(0, -1), 1e-14));
  const auto ell = ConvexDomain::ellipse(Vec2::Zero(), 2.0, 1.0);
  EXPECT_TRUE(ell.outward_normal({2, 0}).isApprox(Vec2(1, 0), 1e-12));
  EXPECT_THROW(disk.outward_normal({0, 0}), DomainError);
}

TEST(OutwardNormal, IsMinusGradientOfSignedDistance) {
  const auto ell = ConvexDomain::ellipse({0.3, 0.1}, 2.0, 1.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(0, 2 * kPi), off(-0.2, 0.2);
  const double h = 1e-6;
  for (int i = 0; i < 50; ++i) {
    const double th = ang(rng);
    const Vec2 q = ell.center() + Vec2(2.0 * std::cos(th), std::sin(th));
    const Vec2 p = q + off(rng) * ell.boundary_normal(q);
    const Vec2 g((ell.signed_distance(p + Vec2(h, 0)) - ell.signed_distance(p - Vec2(h, 0))) / (2 * h),
                 (ell.signed_distance(p + Vec2(0, h)) - ell.signed_distance(p - Vec2(0, h))) / (2 * h));
    const Vec2 n = ell.outward_normal(p);
    EXPECT_NEAR(n.norm(), 1.0, 1e-12);
    EXPECT_LT((n + g).norm(), 1e-6);
  }
}

TEST(Polygon, RequiresStrictConvexityAndEnoughVertices) {
  std::vector<Vec2> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  EXPECT_THROW(ConvexDomain::polygon(square), ParameterError);
  auto poly = regular_polygon_domain({0, 0}, 1.0, 64);
  EXPECT_TRUE(poly.approximates_smooth_boundary());
  EXPECT_NEAR(poly.area(), 0.5 * 64 * std::sin(2 * kPi / 64), 1e-12);
  EXPECT_GT(poly.tube_width(), 0.0);
}

TEST(BoundaryGreen, FullLoopIsArea) {
  const auto ell = ConvexDomain::ellipse({0.5, -0.25}, 2.0, 1.0);
  EXPECT_NEAR(ell.boundary_green(0.0, 2 * kPi), 2 * kPi, 1e-12);
  const auto poly = regular_polygon_domain({0.2, 0.1}, 1.0, 40);
  EXPECT_NEAR(poly.boundary_green(0.0, 40.0), poly.area(), 1e-12);
  const auto disk = ConvexDomain::disk({0, 0}, 1.0);
  EXPECT_NEAR(disk.boundary_green(0.0, kPi) + disk.boundary_green(kPi, 0.0), kPi, 1e-12);
}

TEST(RegionClassify, Examples) {
  const auto d = ConvexDomain::disk(Vec2::Zero(), 1.0);
  const RegionIndex idx{16.0, 0};
  SegmentSet anchor;
  anchor.segments.push_back({{-1, 0}, {-0.5, 0}});
  const auto f = region_classify(d, anchor, idx, {0, 0});
  EXPECT_TRUE(f.in_Dj);  // 1 >= 2/16^{1/4}: inclusive
  const Vec2 p(-0.75, 0.9 / idx.quarter_root());
  EXPECT_TRUE(region_classify(d, anchor, idx, p).in_Kj);
}

TEST(RegionClassify, InclusionsOnRandomPoints) {
  const auto d = ConvexDomain::ellipse(Vec2::Zero(), 1.5, 1.0);
  SegmentSet anchor;
  anchor.segments.push_back({{-1.5, 0}, {-1.0, 0.1}});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.6, 1.6);
  for (double j : {8.0, 16.0, 100.0}) {
    for (int i = 0; i < 2000; ++i) {
      const Vec2 p(u(rng), u(rng));
      const auto f0 = region_classify(d, anchor, {j, 0}, p);
      const auto f3 = region_classify(d, anchor, {j, 3}, p);
      const auto f9 = region_classify(d, anchor, {j, 9}, p);
      if (f0.in_Dj) { EXPECT_TRUE(f0.in_Djk); }
      if (f0.in_Djk) { EXPECT_TRUE(f3.in_Djk); }
      if (f3.in_Djk) { EXPECT_TRUE(f9.in_Djk); }
      if (f0.in_Kj) { EXPECT_TRUE(f0.in_Kj_tilde); }
      if (f0.in_Kj_tilde) { EXPECT_TRUE(f0.in_Kj_hat); }
      // Brute-force distance to the anchor.
      double bf = 1e300;
      for (int s = 0; s <= 20000; ++s) {
        const double t = s / 20000.0;
        bf = std::min(bf, (anchor.segments[0].a + t * (anchor.segments[0].b - anchor.segments[0].a) - p).norm());
      }
      const double r = RegionIndex{j, 0}.k_radius();
      if (std::abs(bf - r) > 1e-4) { EXPECT_EQ(f0.in_Kj, bf < r); }
    }
  }
}

TEST(ClipOutsideInnerSet, SplitsChordIntoBoundaryPieces) {
  const auto d = ConvexDomain::disk(Vec2::Zero(), 1.0);
  const auto pieces = clip_outside_inner_set(d, {-1, 0}, {1, 0}, 0.5);
  ASSERT_EQ(pieces.size(), 2u);
  EXPECT_NEAR(pieces[0].b.x(), -0.5, 1e-12);
  EXPECT_NEAR(pieces[1].a.x(), 0.5, 1e-12);
  EXPECT_TRUE(clip_outside_inner_set(d, {-0.1, 0}, {0.1, 0}, 0.5).empty());
}

TEST(ConvexHull, Examples) {
  std::vector<Vec2> tri = {{0, 0}, {1, 0}, {0, 1}};
  EXPECT_EQ(convex_hull(tri).vertices().size(), 3u);
  std::vector<Vec2> sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  const auto h = convex_hull(sq);
  EXPECT_EQ(h.vertices().size(), 4u);
  EXPECT_DOUBLE_EQ(h.area(), 1.0);
}

TEST(ConvexHull, MatchesBruteForceOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec2> p(100);
  for (auto& q : p) q = {u(rng), u(rng)};
  const auto h = convex_hull(p);
  // Brute force: i is a hull vertex iff some edge (i, k) has all points on its left.
  std::vector<bool> extreme(p.size(), false);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (i == k) continue;
      bool all_left = true;
      for (std::size_t m = 0; m < p.size() && all_left; ++m)
        if (m != i && m != k && cross(p[k] - p[i], p[m] - p[i]) <= 0.0) all_left = false;
      if (all_left) extreme[i] = extreme[k] = true;
    }
  std::size_t count = std::count(extreme.begin(), extreme.end(), true);
  EXPECT_EQ(h.vertices().size(), count);
  for (const auto& v : h.vertices()) {
    const auto it = std::find(p.begin(), p.end(), v);
    ASSERT_NE(it, p.end());
    EXPECT_TRUE(extreme[static_cast<std::size_t>(it - p.begin())]);
  }
  for (const auto& q : p) EXPECT_TRUE(h.contains(q));
}
