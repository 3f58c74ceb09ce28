#pragma once

// Built-in initial networks.

#include "brakke/core.hpp"
#include "brakke/geometry.hpp"
#include "brakke/partition.hpp"

#include <functional>
#include <string>
#include <vector>

namespace brakke {

struct ScenarioGeometry {
  std::string name;
  std::string description;
  LabeledNetwork network;
};

namespace detail {

inline Vec2 on_circle(const Vec2& c, double r, double degrees) {
  const double a = degrees * kPi / 180.0;
  return c + r * Vec2(std::cos(a), std::sin(a));
}

inline std::size_t add_node(LabeledNetwork& net, const Vec2& p, NodeKind kind) {
  net.nodes.push_back({p, kind});
  return net.nodes.size() - 1;
}

// Points of a parabolic bulge of height `bulge` (to the left of a -> b), ends excluded.
inline std::vector<Vec2> bulged_interior(const Vec2& a, const Vec2& b, double bulge, int pieces) {
  std::vector<Vec2> out;
  const Vec2 n = perp((b - a).normalized());
  for (int i = 1; i < pieces; ++i) {
    const double t = static_cast<double>(i) / pieces;
    out.push_back(a + t * (b - a) + 4.0 * bulge * t * (1.0 - t) * n);
  }
  return out;
}

}  // namespace detail

/// Diameter of the unit disk; phase 1 above, 2 below.
inline ScenarioGeometry scenario_chord() {
  ScenarioGeometry s{"chord", "single diameter of the unit disk, N=2", {}};
  auto& n = s.network;
  n.domain = ConvexDomain::disk(Vec2::Zero(), 1.0);
  n.phases = 2;
  const auto a = detail::add_node(n, {-1.0, 0.0}, NodeKind::Anchor);
  const auto b = detail::add_node(n, {1.0, 0.0}, NodeKind::Anchor);
  n.edges.push_back({a, b, {}, 1, 2});
  return s;
}

/// Chord between anchors at 200 and 340 degrees, bulged towards the center.
inline ScenarioGeometry scenario_arc_relax() {
  ScenarioGeometry s{"arc-relax", "off-center chord bulged into an arc, N=2", {}};
  auto& n = s.network;
  n.domain = ConvexDomain::disk(Vec2::Zero(), 1.0);
  n.phases = 2;
  const Vec2 pa = detail::on_circle(Vec2::Zero(), 1.0, 200.0);
  const Vec2 pb = detail::on_circle(Vec2::Zero(), 1.0, 340.0);
  const auto a = detail::add_node(n, pa, NodeKind::Anchor);
  const auto b = detail::add_node(n, pb, NodeKind::Anchor);
  n.edges.push_back({a, b, detail::bulged_interior(pa, pb, 0.4, 16), 1, 2});
  return s;
}

namespace detail {

// Disk circumscribing the square of side 0.8 centered at the origin, with
// anchors at its corners (counter-clockwise from the first quadrant).
inline LabeledNetwork square_anchor_base(std::size_t anchors[4]) {
  LabeledNetwork n;
  n.domain = ConvexDomain::disk(Vec2::Zero(), 0.4 * std::sqrt(2.0));
  n.phases = 4;
  for (int i = 0; i < 4; ++i) anchors[i] = add_node(n, on_circle(Vec2::Zero(), 0.4 * std::sqrt(2.0), 45.0 + 90.0 * i), NodeKind::Anchor);
  return n;
}

}  // namespace detail

/// Both diagonals of the square, meeting in a degree-4 junction. Phases 1..4
/// are the top, left, bottom and right sectors.
inline ScenarioGeometry scenario_cross4() {
  ScenarioGeometry s{"cross4", "two diagonals between four anchors on a square, N=4", {}};
  std::size_t a[4];
  auto& n = s.network;
  n = detail::square_anchor_base(a);
  const auto c = detail::add_node(n, Vec2::Zero(), NodeKind::Junction);
  n.edges.push_back({c, a[0], {}, 1, 4});
  n.edges.push_back({c, a[1], {}, 2, 1});
  n.edges.push_back({c, a[2], {}, 3, 2});
  n.edges.push_back({c, a[3], {}, 4, 3});
  return s;
}

/// H-shaped network on the same anchors, junctions at (+-0.25, 0).
inline ScenarioGeometry scenario_steiner4() {
  ScenarioGeometry s{"steiner4", "H-shaped network between four anchors on a square, N=4", {}};
  std::size_t a[4];
  auto& n = s.network;
  n = detail::square_anchor_base(a);
  const auto r = detail::add_node(n, {0.25, 0.0}, NodeKind::Junction);
  const auto l = detail::add_node(n, {-0.25, 0.0}, NodeKind::Junction);
  n.edges.push_back({r, l, {}, 3, 1});
  n.edges.push_back({r, a[0], {}, 1, 4});
  n.edges.push_back({r, a[3], {}, 4, 3});
  n.edges.push_back({l, a[1], {}, 2, 1});
  n.edges.push_back({l, a[2], {}, 3, 2});
  return s;
}

/// Closed circle of radius 0.5 centered in the unit disk; phase 2 inside.
inline ScenarioGeometry scenario_circle(double radius = 0.5, int points = 256) {
  ScenarioGeometry s{"circle", "closed interior circle of radius 0.5, N=2, no anchors", {}};
  auto& n = s.network;
  n.domain = ConvexDomain::disk(Vec2::Zero(), 1.0);
  n.phases = 2;
  n.boundary_label = 1;
  const auto c = detail::add_node(n, {radius, 0.0}, NodeKind::Interior);
  Edge e{c, c, {}, 2, 1};
  for (int i = 1; i < points; ++i) e.interior.push_back(detail::on_circle(Vec2::Zero(), radius, 360.0 * i / points));
  n.edges.push_back(std::move(e));
  return s;
}

/// Two arcs bulged towards each other, joining anchors at 150/30 and 210/330
/// degrees. The upper boundary arc lies in phase 1, the lower one in phase 2,
/// and the two side arcs in phase 3.
inline ScenarioGeometry scenario_two_arcs() {
  ScenarioGeometry s{"two-arcs", "two facing arcs on anchor pairs, N=3", {}};
  auto& n = s.network;
  n.domain = ConvexDomain::disk(Vec2::Zero(), 1.0);
  n.phases = 3;
  const Vec2 p150 = detail::on_circle(Vec2::Zero(), 1.0, 150.0), p30 = detail::on_circle(Vec2::Zero(), 1.0, 30.0);
  const Vec2 p210 = detail::on_circle(Vec2::Zero(), 1.0, 210.0), p330 = detail::on_circle(Vec2::Zero(), 1.0, 330.0);
  const auto a = detail::add_node(n, p150, NodeKind::Anchor);
  const auto b = detail::add_node(n, p30, NodeKind::Anchor);
  const auto c = detail::add_node(n, p210, NodeKind::Anchor);
  const auto d = detail::add_node(n, p330, NodeKind::Anchor);
  n.edges.push_back({a, b, detail::bulged_interior(p150, p30, -0.2, 16), 1, 3});
  n.edges.push_back({c, d, detail::bulged_interior(p210, p330, 0.2, 16), 3, 2});
  return s;
}

/// Network confined to the lower half-disk: chord between 200 and 340 degrees
/// bulged downwards. Used for the barrier test with the line y = 0.
inline ScenarioGeometry scenario_half_disk() {
  ScenarioGeometry s{"half-disk", "network confined to the lower half of the unit disk, N=2", {}};
  auto& n = s.network;
  n.domain = ConvexDomain::disk(Vec2::Zero(), 1.0);
  n.phases = 2;
  const Vec2 pa = detail::on_circle(Vec2::Zero(), 1.0, 200.0);
  const Vec2 pb = detail::on_circle(Vec2::Zero(), 1.0, 340.0);
  const auto a = detail::add_node(n, pa, NodeKind::Anchor);
  const auto b = detail::add_node(n, pb, NodeKind::Anchor);
  n.edges.push_back({a, b, detail::bulged_interior(pa, pb, -0.3, 16), 1, 2});
  return s;
}

inline std::vector<ScenarioGeometry> builtin_geometries() {
  return {scenario_chord(), scenario_arc_relax(), scenario_cross4(), scenario_steiner4(),
          scenario_circle(), scenario_two_arcs(), scenario_half_disk()};
}

}  // namespace brakke
