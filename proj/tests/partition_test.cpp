#include "brakke/partition.hpp"
#include "brakke/scenarios.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace brakke;

namespace {

bool has_violation(const std::vector<Violation>& v, const std::string& name) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.invariant == name; });
}

}  // namespace

TEST(Validate, BuiltinScenariosAreValid) {
  for (const auto& s : builtin_geometries()) {
    const auto v = validate(s.network);
    EXPECT_TRUE(v.empty()) << s.name << ": " << (v.empty() ? "" : v.front().invariant + " " + v.front().element);
  }
}

TEST(Validate, Examples) {
  auto chord = scenario_chord().network;
  EXPECT_TRUE(validate(chord).empty());
  auto same = chord;
  same.edges[0].right = 1;
  EXPECT_TRUE(has_violation(validate(same), "phase separation"));

  LabeledNetwork crossing;
  crossing.domain = ConvexDomain::disk(Vec2::Zero(), 1.0);
  crossing.phases = 4;
  for (double deg : {0.0, 90.0, 180.0, 270.0})
    crossing.nodes.push_back({Vec2(std::cos(deg * kPi / 180), std::sin(deg * kPi / 180)), NodeKind::Anchor});
  crossing.edges.push_back({0, 2, {}, 1, 2});
  crossing.edges.push_back({1, 3, {}, 3, 4});
  EXPECT_TRUE(has_violation(validate(crossing), "embeddedness"));
}

TEST(Validate, StructuralViolations) {
  auto chord = scenario_chord().network;
  auto off = chord;
  off.nodes[0].pos = {-0.9, 0.0};
  EXPECT_TRUE(has_violation(validate(off), "anchor on boundary"));
  auto outside = chord;
  outside.edges[0].interior.push_back({0.0, 1.5});
  EXPECT_TRUE(has_violation(validate(outside), "interior points inside domain"));
  auto range = chord;
  range.edges[0].left = 3;
  EXPECT_TRUE(has_violation(validate(range), "label range"));
  // Swapping labels on one side of a two-edge chain breaks sector consistency.
  auto chain = chord;
  chain.nodes.push_back({{0.0, 0.0}, NodeKind::Interior});
  chain.edges = {{0, 2, {}, 1, 2}, {2, 1, {}, 2, 1}};
  EXPECT_TRUE(has_violation(validate(chain), "label consistency"));
  // Boundary arcs must agree with the edges ending at each anchor.
  auto arcs = scenario_two_arcs().network;
  arcs.edges[0].right = 2;
  EXPECT_FALSE(validate(arcs).empty());
}

TEST(Validate, DetectsInconsistentHoleLabel) {
  // Inner circle whose outside label disagrees with the surrounding phase.
  auto c = scenario_circle().network;
  c.phases = 3;
  c.edges[0].right = 3;
  EXPECT_TRUE(has_violation(validate(c), "face labelling"));
}

TEST(PhaseAreas, Examples) {
  const auto chord = scenario_chord().network;
  const auto a = phase_areas(chord);
  EXPECT_NEAR(a[1], kPi / 2, 1e-14);
  EXPECT_NEAR(a[2], kPi / 2, 1e-14);
  LabeledNetwork empty;
  empty.domain = ConvexDomain::disk(Vec2::Zero(), 1.0);
  empty.phases = 3;
  const auto e = phase_areas(empty);
  EXPECT_NEAR(e[1], kPi, 1e-14);
  EXPECT_EQ(e[2], 0.0);
  EXPECT_EQ(e[3], 0.0);
  auto bad = chord;
  bad.edges[0].left = 2;
  EXPECT_THROW(phase_areas(bad), StructuralError);
}

TEST(PhaseAreas, SumToDomainAreaAndMatchMonteCarlo) {
  std::mt19937_64 rng(21);
  for (const auto& s : builtin_geometries()) {
    const auto& net = s.network;
    const auto areas = phase_areas(net);
    for (double x : areas.areas) EXPECT_GE(x, 0.0);
    EXPECT_NEAR(areas.total(), net.domain.area(), 1e-8) << s.name;
    const int samples = 200000;
    std::vector<int> hits(static_cast<std::size_t>(net.phases), 0);
    const double R = std::sqrt(net.domain.area() / kPi);
    std::uniform_real_distribution<double> u(-R, R);
    const auto arcs = boundary_arcs(net);
    int inside = 0;
    for (int i = 0; i < samples; ++i) {
      const Vec2 p = net.domain.center() + Vec2(u(rng), u(rng));
      if (!net.domain.contains(p)) continue;
      ++inside;
      const auto l = label_at(net, p, &arcs);
      ASSERT_TRUE(l.has_value());
      ++hits[static_cast<std::size_t>(*l - 1)];
    }
    for (int i = 0; i < net.phases; ++i) {
      const double pr = static_cast<double>(hits[static_cast<std::size_t>(i)]) / inside;
      const double est = pr * net.domain.area();
      const double sigma = std::sqrt(pr * (1 - pr) / inside) * net.domain.area();
      EXPECT_LE(std::abs(est - areas.areas[static_cast<std::size_t>(i)]), 3 * sigma + 1e-12) << s.name << " phase " << i + 1;
    }
  }
}

TEST(PhaseAreas, SteinerSectorsByHand) {
  const auto net = scenario_steiner4().network;
  const auto a = phase_areas(net);
  const double R = 0.4 * std::sqrt(2.0);
  const double segment = 0.5 * R * R * (kPi / 2 - 1.0);  // circular segment beyond a side
  // Top phase: segment above y=0.4 plus trapezoid between y=0 and y=0.4.
  const double trapezoid = 0.5 * (0.8 + 0.5) * 0.4;
  EXPECT_NEAR(a[1], segment + trapezoid, 1e-12);
  EXPECT_NEAR(a[3], segment + trapezoid, 1e-12);
  EXPECT_NEAR(a[2], segment + 0.5 * 0.8 * 0.15, 1e-12);
}

TEST(Resample, Examples) {
  const auto chord = scenario_chord().network;
  auto half = chord;
  half.nodes[1].pos = {1.0, 0.0};
  const auto r = resample(chord, 0.5);
  EXPECT_EQ(r.edges[0].interior.size() + 1, 4u);  // length 2 at h=0.5
  const auto rr = resample(r, 0.5);
  EXPECT_EQ(rr.edges[0].interior, r.edges[0].interior);
  EXPECT_THROW(resample(chord, 0.0), ParameterError);
}

TEST(Resample, UnitChordGivesFourSegments) {
  LabeledNetwork n;
  n.domain = ConvexDomain::disk(Vec2::Zero(), 1.0);
  n.nodes = {{{-0.5, 0.0}, NodeKind::Interior}, {{0.5, 0.0}, NodeKind::Interior}};
  n.edges.push_back({0, 1, {}, 1, 2});
  EXPECT_EQ(resample(n, 0.25).edges[0].interior.size(), 3u);
}

TEST(Resample, PreservesLengthAndAreas) {
  for (const auto& s : builtin_geometries()) {
    const auto r = resample(s.network, 0.01);
    EXPECT_NEAR(r.length(), s.network.length(), 1e-12);
    const auto a0 = phase_areas(s.network), a1 = phase_areas(r);
    for (int i = 1; i <= s.network.phases; ++i) EXPECT_NEAR(a0[i], a1[i], 1e-12) << s.name;
    for (std::size_t e = 0; e < r.edges.size(); ++e) {
      const auto p = r.polyline(e);
      for (std::size_t i = 0; i + 1 < p.size(); ++i) EXPECT_LE((p[i + 1] - p[i]).norm(), 0.01 + 1e-12);
    }
    EXPECT_TRUE(validate(r).empty());
  }
}

TEST(BorderLengths, SumIsTwiceLength) {
  for (const auto& s : builtin_geometries()) {
    const auto b = phase_border_lengths(s.network);
    double total = 0.0;
    for (double x : b) {
      EXPECT_LE(x, s.network.length() + 1e-15);
      total += x;
    }
    EXPECT_DOUBLE_EQ(total, 2 * s.network.length());
  }
}

TEST(Repair, RemovesTinyClosedCurve) {
  auto c = scenario_circle(1e-7, 8).network;
  const auto log = repair_degenerate_faces(c);
  ASSERT_EQ(log.size(), 1u);
  EXPECT_TRUE(c.edges.empty());
  EXPECT_TRUE(c.nodes.empty());
}

TEST(LabelAt, CircleInsideOutside) {
  const auto c = scenario_circle().network;
  EXPECT_EQ(label_at(c, {0.0, 0.0}), 2);
  EXPECT_EQ(label_at(c, {0.0, 0.8}), 1);
}

TEST(Validate, PhaseMayOccupySeveralFaces) {
  auto arcs = scenario_two_arcs().network;
  arcs.edges[1].right = 1;  // top and bottom faces both phase 1
  EXPECT_TRUE(validate(arcs).empty());
}

TEST(Validate, NestedCirclesNeedMatchingLabels) {
  auto net = scenario_circle().network;
  net.phases = 3;
  const auto inner = scenario_circle(0.2, 64).network;
  const std::size_t base = net.nodes.size();
  net.nodes.push_back(inner.nodes[0]);
  Edge e = inner.edges[0];
  e.tail = e.head = base;
  e.left = 3;
  e.right = 2;
  net.edges.push_back(e);
  EXPECT_TRUE(validate(net).empty());
  net.edges.back().right = 1;
  EXPECT_TRUE(has_violation(validate(net), "face labelling"));
}
