#include "brakke/scenarios.hpp"
#include "brakke/varifold.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace brakke;

namespace {

LabeledNetwork circle_network(double radius, int points, double domain_radius = 2.0) {
  LabeledNetwork n;
  n.domain = ConvexDomain::disk(Vec2::Zero(), domain_radius);
  n.phases = 2;
  n.nodes.push_back({{radius, 0.0}, NodeKind::Interior});
  Edge e{0, 0, {}, 2, 1};
  for (int i = 1; i < points; ++i) {
    const double a = 2 * kPi * i / points;
    e.interior.push_back(radius * Vec2(std::cos(a), std::sin(a)));
  }
  n.edges.push_back(e);
  return n;
}

LabeledNetwork segment_network(const Vec2& a, const Vec2& b, double domain_radius = 2.0) {
  LabeledNetwork n;
  n.domain = ConvexDomain::disk(Vec2::Zero(), domain_radius);
  n.nodes = {{a, NodeKind::Interior}, {b, NodeKind::Interior}};
  n.edges.push_back({0, 1, {}, 1, 2});
  return n;
}

VectorField radial_field() {
  return {[](const Vec2& x) { return x; }, [](const Vec2&) { return Mat2(Mat2::Identity()); }};
}

}  // namespace

TEST(Slice, Examples) {
  const auto s = slice(segment_network({-0.5, 0}, {0.5, 0}), 0.5);
  ASSERT_EQ(s.samples.size(), 2u);
  EXPECT_DOUBLE_EQ(s.samples[0].w, 0.5);
  EXPECT_DOUBLE_EQ(s.samples[1].w, 0.5);
  EXPECT_TRUE(s.samples[0].x.isApprox(Vec2(-0.25, 0)));
  EXPECT_THROW(slice(segment_network({0, 0}, {1, 0}), 0.0), ParameterError);
}

TEST(Slice, InvariantsOnScenarios) {
  for (const auto& g : builtin_geometries()) {
    const auto s = slice(g.network, 0.013);
    EXPECT_NEAR(s.mass(), g.network.length(), 1e-10);
    for (const auto& q : s.samples) {
      EXPECT_NEAR(q.tau.norm(), 1.0, 1e-12);
      EXPECT_GT(q.w, 0.0);
    }
    EXPECT_EQ(s.source_hash, network_hash(g.network));
  }
  EXPECT_NE(network_hash(scenario_chord().network), network_hash(scenario_arc_relax().network));
}

TEST(Slice, RichardsonConsistencyOfMass) {
  const auto net = segment_network({-0.5, 0.1}, {0.5, 0.3});
  auto phi = [](const Vec2& x) { return std::exp(x.x()) * (1 + x.y() * x.y()); };
  const double l = net.length();
  const double m1 = mass(slice(net, l / 10), phi), m2 = mass(slice(net, l / 20), phi), m4 = mass(slice(net, l / 40), phi);
  // Midpoint rule: error ratio close to 4 when the step halves.
  EXPECT_NEAR((m1 - m2) / (m2 - m4), 4.0, 0.2);
}

TEST(Mass, Examples) {
  const auto s = slice(circle_network(1.0, 8192), 1e-3);
  EXPECT_NEAR(mass(s, [](const Vec2&) { return 1.0; }), 2 * kPi, 1e-4);
  EXPECT_EQ(mass(s, [](const Vec2&) { return 0.0; }), 0.0);
  EXPECT_NEAR(mass(s, [](const Vec2& x) { return x.squaredNorm(); }), 2 * kPi, 1e-4);
}

TEST(FirstVariation, Examples) {
  const auto net = scenario_steiner4().network;
  const auto s = slice(net, 0.01);
  EXPECT_NEAR(first_variation(s, radial_field()), net.length(), 1e-12);
  const VectorField far{[](const Vec2& x) { return Vec2((x - Vec2(5, 5)).squaredNorm() < 1 ? 1.0 : 0.0, 0.0); },
                        [](const Vec2&) { return Mat2(Mat2::Zero()); }};
  EXPECT_EQ(first_variation(s, far), 0.0);
  // Finite-difference fallback agrees with the analytic Jacobian.
  const VectorField radial_fd{[](const Vec2& x) { return x; }, nullptr};
  EXPECT_NEAR(first_variation(s, radial_fd), net.length(), 1e-8);
}

TEST(FirstVariation, MatchesPushForwardDerivative) {
  const auto net = circle_network(0.7, 2048);
  const auto s = slice(net, 0.002);
  const VectorField g{[](const Vec2& x) { return Vec2(x * (1 + 0.3 * x.x())); },
                      [](const Vec2& x) {
                        Mat2 J = (1 + 0.3 * x.x()) * Mat2::Identity();
                        J.col(0) += 0.3 * x;
                        return J;
                      }};
  const double t = 1e-4;
  auto pushed = net;
  for (auto& n : pushed.nodes) n.pos += t * g.value(n.pos);
  for (auto& p : pushed.edges[0].interior) p += t * g.value(p);
  const double fd = (pushed.length() - net.length()) / t;
  EXPECT_NEAR(first_variation(s, g), fd, 1e-3);
}

TEST(WeightedFirstVariation, ReductionsAndIdentity) {
  const auto net = scenario_arc_relax().network;
  const auto s = slice(net, 0.01);
  const ScalarField one{[](const Vec2&) { return 1.0; }, [](const Vec2&) { return Vec2(Vec2::Zero()); }, nullptr};
  const VectorField g{[](const Vec2& x) { return Vec2(std::sin(x.y()), x.x() * x.y()); },
                      [](const Vec2& x) {
                        Mat2 J;
                        J << 0, std::cos(x.y()), x.y(), x.x();
                        return J;
                      }};
  EXPECT_NEAR(weighted_first_variation(s, one, g), first_variation(s, g), 1e-14);
  const VectorField zero{[](const Vec2&) { return Vec2(Vec2::Zero()); }, [](const Vec2&) { return Mat2(Mat2::Zero()); }};
  const ScalarField phi{[](const Vec2& x) { return std::exp(-x.squaredNorm()); },
                        [](const Vec2& x) { return Vec2(-2 * x * std::exp(-x.squaredNorm())); }, nullptr};
  EXPECT_EQ(weighted_first_variation(s, phi, zero), 0.0);
  // delta V(phi g) + int g . S^perp(grad phi) dV.
  const VectorField phig{[&](const Vec2& x) { return Vec2(phi.value(x) * g.value(x)); },
                         [&](const Vec2& x) {
                           return Mat2(phi.value(x) * g.jacobian(x) + g.value(x) * phi.gradient(x).transpose());
                         }};
  double rhs = first_variation(s, phig);
  for (const auto& q : s.samples) {
    const Vec2 gp = phi.gradient(q.x);
    rhs += q.w * g.value(q.x).dot(gp - q.tau.dot(gp) * q.tau);
  }
  EXPECT_NEAR(weighted_first_variation(s, phi, g), rhs, 1e-8);
}

TEST(SmoothedWeight, Examples) {
  const auto k = make_kernel<2>(0.05);
  const auto s = slice(segment_network({-1.5, 0}, {1.5, 0}), 1e-3);
  EXPECT_EQ(smoothed_weight(s, k, {0.0, 1.5}), 0.0);
  // Line marginal of the 2-D Gaussian.
  for (double y : {0.0, 0.03, 0.07}) {
    const double expect = std::exp(-0.5 * y * y / 0.0025) / std::sqrt(2 * kPi * 0.0025);
    EXPECT_NEAR(smoothed_weight(s, k, {0.1, y}), expect, 0.01 * expect);
  }
  auto doubled = s;
  for (auto& q : doubled.samples) q.w *= 2;
  EXPECT_NEAR(smoothed_weight(doubled, k, {0.1, 0.02}), 2 * smoothed_weight(s, k, {0.1, 0.02}), 1e-12);
}

TEST(SmoothedFirstVariation, SymmetryAndDirection) {
  const auto k = make_kernel<2>(0.05);
  const auto line = slice(segment_network({-1.5, 0}, {1.5, 0}), 1e-3);
  EXPECT_LT(smoothed_first_variation(line, k, {0.0, 0.0}).norm(), 1e-8);
  const auto circ = slice(circle_network(1.0, 8192), 1e-3);
  for (int i = 0; i < 8; ++i) {
    const double a = 2 * kPi * i / 8 + 0.1;
    const Vec2 x(std::cos(a), std::sin(a));
    const Vec2 v = smoothed_first_variation(circ, k, x);
    const double tangential = std::abs(v.dot(perp(x)));
    EXPECT_LT(tangential, 1e-3 * v.norm());
  }
  auto doubled = circ;
  for (auto& q : doubled.samples) q.w *= 2;
  EXPECT_TRUE(smoothed_first_variation(doubled, k, {1, 0}).isApprox(2 * smoothed_first_variation(circ, k, {1, 0}), 1e-12));
}

TEST(SmoothedMeanCurvature, UnitCircle) {
  const auto k = make_kernel<2>(0.05);
  const auto s = slice(circle_network(1.0, 8192), 1e-3);
  const CurvatureField field(s, k);
  for (int i = 0; i < 16; ++i) {
    const double a = 2 * kPi * i / 16 + 0.05;
    const Vec2 x(std::cos(a), std::sin(a));
    const Vec2 h = field(x);
    EXPECT_NEAR(h.norm(), 1.0, 0.1);
    EXPECT_LT(std::acos(std::clamp(h.normalized().dot(-x), -1.0, 1.0)) * 180 / kPi, 5.0);
    EXPECT_LE(h.norm(), 2.0 / sq(k.eps()));
  }
}

TEST(SmoothedMeanCurvature, FastFieldMatchesReference) {
  for (double eps : {0.03, 0.08}) {  // separable and general lattice paths
    const auto k = make_kernel<2>(eps);
    const auto s = slice(scenario_arc_relax().network, 0.004);
    const CurvatureField field(s, k);
    EXPECT_EQ(field.lattice().separable(), eps < 0.039);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 6; ++i) {
      const Vec2 x = s.samples[static_cast<std::size_t>(i * 97) % s.samples.size()].x + 0.02 * Vec2(u(rng), u(rng));
      const Vec2 a = field(x), b = smoothed_mean_curvature(s, k, x);
      EXPECT_LT((a - b).norm(), 1e-9 * std::max(1.0, b.norm())) << eps;
    }
  }
}

TEST(SmoothedMeanCurvature, StraightChordAndBound) {
  const auto k = make_kernel<2>(0.03);
  const auto s = slice(segment_network({-1.5, 0}, {1.5, 0}), 1e-3);
  const CurvatureField field(s, k);
  EXPECT_LT(field({0.0, 0.0}).norm(), 1e-6);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.6, 1.6), v(-0.1, 0.1);
  for (int i = 0; i < 500; ++i) EXPECT_LE(field({u(rng), v(rng)}).norm(), 2.0 / sq(k.eps()));
}

TEST(SmoothedMeanCurvature, ScalesInverselyUnderDilation) {
  const auto s1 = slice(circle_network(0.4, 4096), 1e-3);
  const auto s2 = slice(circle_network(0.8, 4096), 2e-3);
  const CurvatureField f1(s1, make_kernel<2>(0.02)), f2(s2, make_kernel<2>(0.04));
  for (int i = 0; i < 8; ++i) {
    const double a = 2 * kPi * i / 8 + 0.2;
    const Vec2 x(std::cos(a), std::sin(a));
    const Vec2 h1 = f1(0.4 * x), h2 = f2(0.8 * x);
    EXPECT_NEAR(h2.norm(), 0.5 * h1.norm(), 0.01 * 0.5 * h1.norm());
  }
}

LabeledNetwork ellipse_network(double a, double b, int points, const Vec2& c) {
  LabeledNetwork n;
  n.domain = ConvexDomain::disk(Vec2::Zero(), 2.0);
  n.nodes.push_back({c + Vec2(a, 0.0), NodeKind::Interior});
  Edge e{0, 0, {}, 2, 1};
  for (int i = 1; i < points; ++i) {
    const double t = 2 * kPi * i / points;
    e.interior.push_back(c + Vec2(a * std::cos(t), b * std::sin(t)));
  }
  n.edges.push_back(e);
  return n;
}

double tangential_fraction(const VarifoldSlice& s, double eps) {
  const CurvatureField f(s, make_kernel<2>(eps));
  double worst = 0.0;
  for (std::size_t i = 0; i < s.samples.size(); i += 37) {
    const Vec2 h = f(s.samples[i].x);
    worst = std::max(worst, std::abs(h.dot(s.samples[i].tau)) / h.norm());
  }
  return worst;
}

TEST(SmoothedMeanCurvature, PerpendicularOnCircle) {
  // One sample per chord midpoint; off-center so the lattice is not symmetric.
  const auto s = slice(ellipse_network(0.5, 0.5, 8192, {0.0123, -0.0071}), 1e-2);
  for (double eps : {0.04, 0.02, 0.01}) EXPECT_LT(tangential_fraction(s, eps), 1e-9);
}

TEST(SmoothedMeanCurvature, TangentialFractionHalvesWithEps) {
  const auto s = slice(ellipse_network(0.5, 0.3, 8192, {0.0123, -0.0071}), 1e-2);
  const double t1 = tangential_fraction(s, 0.04), t2 = tangential_fraction(s, 0.02), t3 = tangential_fraction(s, 0.01);
  RecordProperty("tangential_fraction", std::to_string(t1) + " " + std::to_string(t2) + " " + std::to_string(t3));
  EXPECT_LE(t2, 0.75 * t1);
  EXPECT_LE(t3, 0.75 * t2);
}

TEST(SmoothedMeanCurvature, GradientBound) {
  const double eps = 0.04;
  const auto k = make_kernel<2>(eps);
  const auto s = slice(scenario_steiner4().network, 0.003);
  const CurvatureField f(s, k);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const double hh = 1e-5;
  for (int i = 0; i < 200; ++i) {
    const Vec2 x(u(rng), u(rng));
    Mat2 J;
    J.col(0) = (f(x + Vec2(hh, 0)) - f(x - Vec2(hh, 0))) / (2 * hh);
    J.col(1) = (f(x + Vec2(0, hh)) - f(x - Vec2(0, hh))) / (2 * hh);
    EXPECT_LE(J.norm(), 2.0 / std::pow(eps, 4));
  }
}

TEST(SmoothedWeight, MassComparison) {
  const auto k = make_kernel<2>(0.05);
  const auto s = slice(scenario_two_arcs().network, 0.005);
  const double h = 0.0125;
  double total = 0.0;
  for (double x = -1.6; x <= 1.6; x += h)
    for (double y = -1.6; y <= 1.6; y += h) total += smoothed_weight(s, k, {x, y}) * h * h;
  EXPECT_LE(total, s.mass() + 1e-6);
}
