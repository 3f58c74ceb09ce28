#pragma once

// The three epoch operations: area-reducing deformation (reduce), retraction
// onto the shrunken domain (retract), and damped smoothed-curvature motion
// (flow_step).

#include "brakke/core.hpp"
#include "brakke/cutoff.hpp"
#include "brakke/geometry.hpp"
#include "brakke/kernel.hpp"
#include "brakke/partition.hpp"
#include "brakke/varifold.hpp"

#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

namespace brakke {

enum class MoveKind { EdgeCollapse, VertexMerge, JunctionSplit, ChainStraighten, LoopDelete, Retract, Flow };

inline const char* to_string(MoveKind k) {
  switch (k) {
    case MoveKind::EdgeCollapse: return "edge-collapse";
    case MoveKind::VertexMerge: return "vertex-merge";
    case MoveKind::JunctionSplit: return "junction-split";
    case MoveKind::ChainStraighten: return "chain-straighten";
    case MoveKind::LoopDelete: return "loop-delete";
    case MoveKind::Retract: return "retract";
    case MoveKind::Flow: return "flow";
  }
  return "?";
}

struct MoveRecord {
  MoveKind kind;
  double length_delta = 0.0;
  double max_displacement = 0.0;
  /// Signed change of each phase area (index i holds phase i+1).
  std::vector<double> area_deltas;
  /// Upper bound on the symmetric difference swept by the move, per phase.
  std::vector<double> swept_areas;
  bool accepted = true;
  std::string note;
};

/// Upper bound on the excess: the length change achieved by one greedy pass
/// of the move catalog inside `region`.
struct ExcessEstimate {
  double achieved_reduction = 0.0;
  std::string region;
};

struct ReductionCaps {
  double displacement;
  double area;
};

struct ReduceResult {
  LabeledNetwork network;
  ExcessEstimate excess;
  std::vector<MoveRecord> moves;
};

/// Signed per-phase area change.
inline std::vector<double> area_change(const PhaseAreaVector& before, const PhaseAreaVector& after) {
  std::vector<double> d(before.areas.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = after.areas[i] - before.areas[i];
  return d;
}

namespace detail {

// Sum of |fan triangle areas| of a closed polygon: bounds the area where its
// winding number is non-zero.
inline double fan_area_bound(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) s += 0.5 * std::abs(cross(poly[k] - poly[0], poly[k + 1] - poly[0]));
  return s;
}

// True if segment [a, b] meets any network segment other than those listed
// (by edge and segment index) or at the shared endpoints.
inline bool chord_is_clear(const LabeledNetwork& net, const Vec2& a, const Vec2& b, std::size_t edge,
                           std::size_t first_seg, std::size_t last_seg) {
  const double xmin = std::min(a.x(), b.x()), xmax = std::max(a.x(), b.x());
  const double ymin = std::min(a.y(), b.y()), ymax = std::max(a.y(), b.y());
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto p = net.polyline(e);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      if (e == edge && i >= first_seg && i <= last_seg) continue;
      const Vec2 &c = p[i], &d = p[i + 1];
      if (std::max(c.x(), d.x()) < xmin || std::min(c.x(), d.x()) > xmax || std::max(c.y(), d.y()) < ymin ||
          std::min(c.y(), d.y()) > ymax)
        continue;
      // Segments sharing an endpoint with the chord may touch only there.
      const bool ca = c == a || c == b, da = d == a || d == b;
      if (ca || da) {
        const Vec2 shared = ca ? c : d;
        const Vec2 other = ca ? d : c;
        const Vec2 chord_other = shared == a ? b : a;
        const Vec2 u = chord_other - shared, v = other - shared;
        if (std::abs(cross(u, v)) <= 1e-14 * u.norm() * v.norm() && u.dot(v) > 0.0) return false;
        continue;
      }
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  return true;
}

struct SplitProblem {
  Vec2 center;
  double radius;
  std::vector<Vec2> targets1, targets2;
};

inline Vec2 project_to_ball(const Vec2& u, const Vec2& c, double r) {
  const Vec2 d = u - c;
  const double n = d.norm();
  return n <= r ? u : Vec2(c + d * (r / n));
}

inline double split_objective(const gsl_vector* x, void* params) {
  const auto* p = static_cast<const SplitProblem*>(params);
  const Vec2 u1 = project_to_ball({gsl_vector_get(x, 0), gsl_vector_get(x, 1)}, p->center, p->radius);
  const Vec2 u2 = project_to_ball({gsl_vector_get(x, 2), gsl_vector_get(x, 3)}, p->center, p->radius);
  double l = (u1 - u2).norm();
  for (const auto& q : p->targets1) l += (q - u1).norm();
  for (const auto& q : p->targets2) l += (q - u2).norm();
  return l;
}

/// Two-point Steiner placement within the ball, derivative-free.
inline std::pair<Vec2, Vec2> optimize_split(const SplitProblem& prob, Vec2 u1, Vec2 u2) {
  const gsl_multimin_fminimizer_type* T = gsl_multimin_fminimizer_nmsimplex2;
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(T, 4);
  gsl_vector* x = gsl_vector_alloc(4);
  gsl_vector* step = gsl_vector_alloc(4);
  gsl_vector_set(x, 0, u1.x());
  gsl_vector_set(x, 1, u1.y());
  gsl_vector_set(x, 2, u2.x());
  gsl_vector_set(x, 3, u2.y());
  gsl_vector_set_all(step, 0.25 * prob.radius);
  gsl_multimin_function f{&split_objective, 4, const_cast<SplitProblem*>(&prob)};
  gsl_multimin_fminimizer_set(s, &f, x, step);
  for (int it = 0; it < 5000; ++it) {
    if (gsl_multimin_fminimizer_iterate(s)) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-10 * prob.radius) == GSL_SUCCESS) break;
  }
  const gsl_vector* best = gsl_multimin_fminimizer_x(s);
  u1 = project_to_ball({gsl_vector_get(best, 0), gsl_vector_get(best, 1)}, prob.center, prob.radius);
  u2 = project_to_ball({gsl_vector_get(best, 2), gsl_vector_get(best, 3)}, prob.center, prob.radius);
  gsl_vector_free(x);
  gsl_vector_free(step);
  gsl_multimin_fminimizer_free(s);
  return {u1, u2};
}

class ReducePass {
 public:
  ReducePass(const LabeledNetwork& net, const RegionIndex& idx, const ReductionCaps& caps)
      : net_(net), idx_(idx), caps_(caps), budget_(static_cast<std::size_t>(net.phases), caps.area) {}

  ReduceResult run() {
    const LabeledNetwork start = net_;
    const double len0 = net_.length();
    frozen_nodes_.assign(net_.nodes.size(), false);
    frozen_edges_.assign(net_.edges.size(), false);
    delete_small_loops();
    collapse_short_edges();
    merge_close_vertices();
    split_junctions();
    straighten_chains();
    net_.compact_nodes();
    ReduceResult r;
    if (!validate(net_).empty()) {
      // Internal inconsistency: discard the whole pass.
      for (auto& m : moves_) m.accepted = false;
      moves_.push_back({MoveKind::ChainStraighten, 0.0, 0.0, {}, {}, false, "pass rolled back: validation failed"});
      net_ = start;
    }
    r.network = net_;
    r.moves = std::move(moves_);
    r.excess.achieved_reduction = std::min(0.0, net_.length() - len0);
    r.excess.region = "D_j: signed distance >= " + std::to_string(idx_.d_threshold());
    return r;
  }

 private:
  LabeledNetwork net_;
  RegionIndex idx_;
  ReductionCaps caps_;
  std::vector<double> budget_;
  std::vector<bool> frozen_nodes_, frozen_edges_;
  std::vector<MoveRecord> moves_;

  bool in_region(const Vec2& p) const {
    const double sd = net_.domain.signed_distance(p);
    return sd > 0.0 && sd >= idx_.d_threshold();
  }

  bool within_budget(const std::vector<double>& swept) const {
    for (std::size_t i = 0; i < swept.size(); ++i)
      if (swept[i] > budget_[i]) return false;
    return true;
  }

  void spend(const std::vector<double>& swept) {
    for (std::size_t i = 0; i < swept.size(); ++i) budget_[i] -= swept[i];
  }

  std::vector<double> swept_for(Label a, Label b, double area) const {
    std::vector<double> s(static_cast<std::size_t>(net_.phases), 0.0);
    s[static_cast<std::size_t>(a - 1)] += area;
    s[static_cast<std::size_t>(b - 1)] += area;
    return s;
  }

  // Topological move: commit `cand` if it is valid, shorter, inside the caps.
  bool try_commit(LabeledNetwork cand, MoveKind kind, double displacement, const std::vector<Vec2>& region_points,
                  std::vector<double> swept) {
    MoveRecord rec{kind, cand.length() - net_.length(), displacement, {}, swept, false, {}};
    bool ok = rec.length_delta < 0.0 && displacement <= caps_.displacement && within_budget(swept);
    for (const auto& p : region_points) ok = ok && in_region(p);
    if (ok) ok = validate(cand).empty();
    if (ok) {
      rec.area_deltas = area_change(phase_areas_unchecked(net_), phase_areas_unchecked(cand));
      for (std::size_t i = 0; i < swept.size(); ++i) ok = ok && std::abs(rec.area_deltas[i]) <= swept[i] + 1e-15;
    }
    rec.accepted = ok;
    if (ok) {
      spend(swept);
      net_ = std::move(cand);
      frozen_nodes_.resize(net_.nodes.size(), true);
      frozen_edges_.resize(net_.edges.size(), true);
    }
    moves_.push_back(std::move(rec));
    return ok;
  }

  void delete_small_loops() {
    for (std::size_t e = 0; e < net_.edges.size(); ++e) {
      const Edge& ed = net_.edges[e];
      if (ed.tail != ed.head || frozen_edges_[e] || net_.edge_length(e) >= caps_.displacement) continue;
      const auto poly = net_.polyline(e);
      const double area = std::abs(polyline_green(poly));
      double disp = 0.0;
      for (const auto& p : poly) disp = std::max(disp, (p - poly.front()).norm());
      LabeledNetwork cand = net_;
      cand.edges.erase(cand.edges.begin() + static_cast<long>(e));
      cand.compact_nodes();
      cand.refresh_kinds();
      std::vector<bool> fn = frozen_nodes_, fe = frozen_edges_;
      if (try_commit(std::move(cand), MoveKind::LoopDelete, disp, poly, swept_for(ed.left, ed.right, area))) {
        // Node indices may have shifted; freeze everything touched conservatively.
        frozen_edges_.assign(net_.edges.size(), false);
        frozen_nodes_.assign(net_.nodes.size(), false);
        for (std::size_t i = 0; i < net_.nodes.size(); ++i)
          if ((net_.nodes[i].pos - poly.front()).norm() <= caps_.displacement) frozen_nodes_[i] = true;
        --e;
      }
    }
  }

  // Node positions move to the midpoint; each incident edge's first segment
  // is redrawn, sweeping a triangle.
  std::vector<double> swept_by_node_move(const LabeledNetwork& net, std::size_t node, const Vec2& to) const {
    std::vector<double> s(static_cast<std::size_t>(net.phases), 0.0);
    const Vec2 from = net.nodes[node].pos;
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
      const Edge& ed = net.edges[e];
      if (ed.tail != node && ed.head != node) continue;
      const auto p = net.polyline(e);
      auto add = [&](const Vec2& q) {
        const double a = 0.5 * std::abs(cross(from - q, to - q));
        s[static_cast<std::size_t>(ed.left - 1)] += a;
        s[static_cast<std::size_t>(ed.right - 1)] += a;
      };
      if (ed.tail == node) add(p[1]);
      if (ed.head == node) add(p[p.size() - 2]);
    }
    return s;
  }

  void collapse_short_edges() {
    for (std::size_t e = 0; e < net_.edges.size(); ++e) {
      const Edge ed = net_.edges[e];
      if (ed.tail == ed.head || frozen_edges_[e]) continue;
      if (net_.nodes[ed.tail].kind == NodeKind::Anchor || net_.nodes[ed.head].kind == NodeKind::Anchor) continue;
      if (frozen_nodes_[ed.tail] || frozen_nodes_[ed.head]) continue;
      const double len = net_.edge_length(e);
      if (len >= caps_.displacement) continue;
      const auto poly = net_.polyline(e);
      const Vec2 m = 0.5 * (net_.nodes[ed.tail].pos + net_.nodes[ed.head].pos);
      double disp = 0.0;
      for (const auto& p : poly) disp = std::max(disp, (p - m).norm());
      LabeledNetwork cand = net_;
      auto sw = swept_by_node_move(net_, ed.tail, m);
      const auto sw2 = swept_by_node_move(net_, ed.head, m);
      for (std::size_t i = 0; i < sw.size(); ++i) sw[i] += sw2[i];
      const double lens_area = detail::fan_area_bound(poly);
      sw[static_cast<std::size_t>(ed.left - 1)] += lens_area;
      sw[static_cast<std::size_t>(ed.right - 1)] += lens_area;
      cand.nodes[ed.tail].pos = m;
      for (auto& other : cand.edges) {
        if (other.tail == ed.head) other.tail = ed.tail;
        if (other.head == ed.head) other.head = ed.tail;
      }
      cand.edges.erase(cand.edges.begin() + static_cast<long>(e));
      cand.compact_nodes();
      cand.refresh_kinds();
      std::vector<Vec2> pts = poly;
      pts.push_back(m);
      if (try_commit(std::move(cand), MoveKind::EdgeCollapse, disp, pts, sw)) {
        frozen_edges_.assign(net_.edges.size(), false);
        frozen_nodes_.assign(net_.nodes.size(), false);
        for (std::size_t i = 0; i < net_.nodes.size(); ++i)
          if ((net_.nodes[i].pos - m).norm() <= 2 * caps_.displacement) frozen_nodes_[i] = true;
        for (std::size_t k = 0; k < net_.edges.size(); ++k)
          if (frozen_nodes_[net_.edges[k].tail] || frozen_nodes_[net_.edges[k].head]) frozen_edges_[k] = true;
        e = static_cast<std::size_t>(-1);
      }
    }
  }

  void merge_close_vertices() {
    const auto deg = net_.degrees();
    for (std::size_t a = 0; a < net_.nodes.size(); ++a)
      for (std::size_t b = a + 1; b < net_.nodes.size(); ++b) {
        if (net_.nodes[a].kind == NodeKind::Anchor || net_.nodes[b].kind == NodeKind::Anchor) continue;
        if (frozen_nodes_[a] || frozen_nodes_[b]) continue;
        const Vec2 pa = net_.nodes[a].pos, pb = net_.nodes[b].pos;
        if ((pa - pb).norm() >= caps_.displacement) continue;
        bool adjacent = false;
        for (const auto& e : net_.edges) adjacent = adjacent || (e.tail == a && e.head == b) || (e.tail == b && e.head == a);
        if (adjacent) continue;
        const Vec2 m = 0.5 * (pa + pb);
        auto sw = swept_by_node_move(net_, a, m);
        const auto sw2 = swept_by_node_move(net_, b, m);
        for (std::size_t i = 0; i < sw.size(); ++i) sw[i] += sw2[i];
        LabeledNetwork cand = net_;
        cand.nodes[a].pos = m;
        for (auto& e : cand.edges) {
          if (e.tail == b) e.tail = a;
          if (e.head == b) e.head = a;
        }
        cand.compact_nodes();
        cand.refresh_kinds();
        if (try_commit(std::move(cand), MoveKind::VertexMerge, 0.5 * (pa - pb).norm(), {pa, pb}, sw)) {
          frozen_nodes_.assign(net_.nodes.size(), false);
          frozen_edges_.assign(net_.edges.size(), false);
          for (std::size_t i = 0; i < net_.nodes.size(); ++i)
            if ((net_.nodes[i].pos - m).norm() <= 2 * caps_.displacement) frozen_nodes_[i] = true;
          for (std::size_t k = 0; k < net_.edges.size(); ++k)
            if (frozen_nodes_[net_.edges[k].tail] || frozen_nodes_[net_.edges[k].head]) frozen_edges_[k] = true;
          return;  // indices changed; one merge per pass
        }
      }
    (void)deg;
  }

  void split_junctions() {
    for (std::size_t v = 0; v < net_.nodes.size(); ++v) {
      if (net_.nodes[v].kind == NodeKind::Anchor || frozen_nodes_[v]) continue;
      const auto inc = incidence(net_);
      const auto& ring = inc[v];
      if (ring.size() < 4) continue;
      bool loop = false;
      for (const auto& end : ring) loop = loop || net_.edges[end.edge].tail == net_.edges[end.edge].head;
      if (loop) continue;
      const Vec2 c = net_.nodes[v].pos;
      const std::size_t d = ring.size();
      LabeledNetwork best;
      double best_len = net_.length();
      double best_disp = 0.0;
      std::vector<double> best_sw;
      std::vector<Vec2> best_pts;
      for (std::size_t i = 0; i < d; ++i) {
        // Split off the consecutive pair (i, i+1).
        std::vector<std::size_t> g1 = {i, (i + 1) % d}, g2;
        for (std::size_t k = 2; k < d; ++k) g2.push_back((i + k) % d);
        SplitProblem prob{c, caps_.displacement, {}, {}};
        auto next_point = [&](const EdgeEnd& end) {
          const auto p = net_.polyline(end.edge);
          return end.at_tail ? p[1] : p[p.size() - 2];
        };
        Vec2 dir1 = Vec2::Zero(), dir2 = Vec2::Zero();
        for (auto k : g1) {
          prob.targets1.push_back(next_point(ring[k]));
          dir1 += ring[k].direction.normalized();
        }
        for (auto k : g2) {
          prob.targets2.push_back(next_point(ring[k]));
          dir2 += ring[k].direction.normalized();
        }
        if (dir1.norm() < 1e-12) dir1 = perp(ring[g1[0]].direction);
        if (dir2.norm() < 1e-12) dir2 = -dir1;
        const Vec2 s1 = c + 0.5 * caps_.displacement * dir1.normalized();
        const Vec2 s2 = c + 0.5 * caps_.displacement * dir2.normalized();
        const auto [u1, u2] = optimize_split(prob, s1, s2);
        if ((u1 - u2).norm() == 0.0) continue;
        LabeledNetwork cand = net_;
        cand.nodes[v].pos = u2;
        cand.nodes.push_back({u1, NodeKind::Junction});
        const std::size_t n1 = cand.nodes.size() - 1;
        for (auto k : g1) {
          Edge& e = cand.edges[ring[k].edge];
          if (ring[k].at_tail) e.tail = n1;
          else e.head = n1;
        }
        // Sector labels: L_k lies counter-clockwise after ring[k].
        const Label l_before = outgoing_right(net_, ring[g1[0]]);
        const Label l_after = outgoing_left(net_, ring[g1[1]]);
        cand.edges.push_back({n1, v, {}, l_before, l_after});
        cand.refresh_kinds();
        const double len = cand.length();
        if (len >= best_len) continue;
        std::vector<double> sw(static_cast<std::size_t>(net_.phases), 0.0);
        // Region between old and new arms: the polygon c -> targets -> u.
        for (std::size_t gi = 0; gi < 2; ++gi) {
          const auto& grp = gi == 0 ? g1 : g2;
          const Vec2 u = gi == 0 ? u1 : u2;
          for (auto k : grp) {
            const Edge& e = net_.edges[ring[k].edge];
            const Vec2 q = next_point(ring[k]);
            const double a = 0.5 * std::abs(cross(c - q, u - q));
            sw[static_cast<std::size_t>(e.left - 1)] += a;
            sw[static_cast<std::size_t>(e.right - 1)] += a;
          }
        }
        const double tri = 0.5 * std::abs(cross(u1 - c, u2 - c));
        sw[static_cast<std::size_t>(l_before - 1)] += tri;
        sw[static_cast<std::size_t>(l_after - 1)] += tri;
        best = std::move(cand);
        best_len = len;
        best_disp = std::max((u1 - c).norm(), (u2 - c).norm());
        best_sw = sw;
        best_pts = {c, u1, u2};
        for (const auto& q : prob.targets1) best_pts.push_back(q);
        for (const auto& q : prob.targets2) best_pts.push_back(q);
      }
      if (best_sw.empty()) continue;
      try_commit(std::move(best), MoveKind::JunctionSplit, best_disp, best_pts, best_sw);
      frozen_nodes_.resize(net_.nodes.size(), true);
      frozen_nodes_[v] = true;
      for (std::size_t k = 0; k < net_.edges.size(); ++k)
        if (net_.edges[k].tail == v || net_.edges[k].head == v || net_.edges[k].tail >= frozen_nodes_.size() - 1)
          frozen_edges_[k] = true;
    }
  }

  void straighten_chains() {
    const double delta = caps_.displacement;
    for (std::size_t e = 0; e < net_.edges.size(); ++e) {
      if (frozen_edges_[e]) continue;
      std::size_t a = 1;  // first removable polyline index
      while (true) {
        const auto p = net_.polyline(e);
        if (a + 1 >= p.size()) break;
        const Vec2 start = p[a - 1];
        if (!in_region(start)) {
          ++a;
          continue;
        }
        // Grow the window [a, b] of removable points while every point stays
        // within delta of the chord p[a-1] -> p[b+1].
        std::size_t best_b = 0;
        double best_gain = 0.0, best_disp = 0.0, best_sweep = 0.0;
        for (std::size_t b = a; b + 1 < p.size(); ++b) {
          if (!in_region(p[b]) || (p[b] - start).norm() > 2 * delta) break;
          const Vec2 end = p[b + 1];
          if (!in_region(end)) break;
          double disp = 0.0, chain = 0.0;
          for (std::size_t k = a; k <= b; ++k) disp = std::max(disp, point_segment_distance(p[k], start, end));
          if (disp > delta) break;
          for (std::size_t k = a - 1; k <= b; ++k) chain += (p[k + 1] - p[k]).norm();
          const double gain = chain - (end - start).norm();
          std::vector<Vec2> poly(p.begin() + static_cast<long>(a - 1), p.begin() + static_cast<long>(b + 2));
          const double sweep = fan_area_bound(poly);
          if (gain > 1e-15 * chain && sweep <= budget_[static_cast<std::size_t>(net_.edges[e].left - 1)] &&
              sweep <= budget_[static_cast<std::size_t>(net_.edges[e].right - 1)]) {
            best_b = b;
            best_gain = gain;
            best_disp = disp;
            best_sweep = sweep;
          }
        }
        if (best_b == 0 || !chord_is_clear(net_, start, p[best_b + 1], e, a - 1, best_b)) {
          ++a;
          continue;
        }
        Edge& ed = net_.edges[e];
        std::vector<Vec2> poly(p.begin() + static_cast<long>(a - 1), p.begin() + static_cast<long>(best_b + 2));
        MoveRecord rec{MoveKind::ChainStraighten, -best_gain, best_disp, std::vector<double>(budget_.size(), 0.0),
                       swept_for(ed.left, ed.right, best_sweep), true, {}};
        // Area: the left phase loses the Green integral of chain minus chord.
        std::vector<Vec2> chord = {poly.front(), poly.back()};
        const double dg = polyline_green(chord) - polyline_green(poly);
        rec.area_deltas[static_cast<std::size_t>(ed.left - 1)] += dg;
        rec.area_deltas[static_cast<std::size_t>(ed.right - 1)] -= dg;
        spend(rec.swept_areas);
        // Interior index = polyline index - 1.
        ed.interior.erase(ed.interior.begin() + static_cast<long>(a - 1), ed.interior.begin() + static_cast<long>(best_b));
        moves_.push_back(std::move(rec));
        a += 1;  // the chord end is fixed; continue after it
      }
    }
  }
};

}  // namespace detail

/// One greedy pass of the move catalog restricted to D_j.
inline ReduceResult reduce(const LabeledNetwork& net, const RegionIndex& idx, const ReductionCaps& caps) {
  if (!(caps.displacement > 0.0) || !(caps.area > 0.0)) throw ParameterError("reduction caps must be positive");
  return detail::ReducePass(net, idx, caps).run();
}

// ---------------------------------------------------------------------------
// Retraction.

struct RetractResult {
  LabeledNetwork network;
  std::vector<MoveRecord> moves;
};

enum class SchemeMode { Paper, Desk };

/// Project every non-anchor point outside D_{j,k-1} and outside K_j onto
/// the boundary of D_{j,k-1}. In paper mode only points within j^{-10} of
/// D_{j,k-1} are eligible. `anchor` is Gamma_0 \ D_j.
inline RetractResult retract(const LabeledNetwork& net, const SegmentSet& anchor, const RegionIndex& idx,
                             SchemeMode mode = SchemeMode::Desk) {
  RetractResult r{net, {}};
  const RegionIndex prev{idx.j, std::max<std::int64_t>(idx.k - 1, 0)};
  const double s = prev.djk_threshold();
  const double band = std::pow(idx.j, -10.0);
  const auto& dom = net.domain;
  auto eligible = [&](const Vec2& p) {
    const double sd = dom.signed_distance(p);
    if (!(sd < s)) return false;
    if (anchor.distance(p) < idx.k_radius()) return false;
    return mode == SchemeMode::Desk || s - sd <= band;
  };
  // Mark eligible points: nodes by index, interior points by (edge, index).
  std::vector<bool> node_mark(net.nodes.size(), false);
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    node_mark[i] = net.nodes[i].kind != NodeKind::Anchor && eligible(net.nodes[i].pos);
  std::vector<std::vector<bool>> pt_mark(net.edges.size());
  bool any = std::any_of(node_mark.begin(), node_mark.end(), [](bool b) { return b; });
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    pt_mark[e].resize(net.edges[e].interior.size());
    for (std::size_t i = 0; i < net.edges[e].interior.size(); ++i) any |= (pt_mark[e][i] = eligible(net.edges[e].interior[i]));
  }
  if (!any) return r;

  // Components of marked points (union-find over a global point numbering).
  std::vector<std::size_t> offset(net.edges.size() + 1, net.nodes.size());
  for (std::size_t e = 0; e < net.edges.size(); ++e) offset[e + 1] = offset[e] + net.edges[e].interior.size();
  std::vector<std::size_t> parent(offset.back());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto marked = [&](std::size_t e, std::size_t k, const Edge& ed, std::size_t len) -> bool {
    if (k == 0) return node_mark[ed.tail];
    if (k == len - 1) return node_mark[ed.head];
    return static_cast<bool>(pt_mark[e][k - 1]);
  };
  auto gid = [&](std::size_t e, std::size_t k, const Edge& ed, std::size_t len) -> std::size_t {
    if (k == 0) return ed.tail;
    if (k == len - 1) return ed.head;
    return offset[e] + k - 1;
  };
  // Outward-facing labels per component, from segments with both ends marked.
  std::map<std::size_t, std::set<Label>> outward;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const Edge& ed = net.edges[e];
    const auto p = net.polyline(e);
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      if (!marked(e, k, ed, p.size()) || !marked(e, k + 1, ed, p.size())) continue;
      parent[find(gid(e, k, ed, p.size()))] = find(gid(e, k + 1, ed, p.size()));
    }
  }
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const Edge& ed = net.edges[e];
    const auto p = net.polyline(e);
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (!marked(e, k, ed, p.size())) continue;
      const std::size_t root = find(gid(e, k, ed, p.size()));
      const Vec2 t = (k + 1 < p.size() ? p[k + 1] - p[k] : p[k] - p[k - 1]);
      const Vec2 nu = dom.boundary_normal(dom.nearest_boundary_point(p[k]));
      if (t.norm() == 0.0) continue;
      outward[root].insert(cross(t, nu) > 0.0 ? ed.left : ed.right);
    }
  }
  for (const auto& [root, labels] : outward)
    if (labels.size() >= 2) throw AmbiguityError("retraction component touches " + std::to_string(labels.size()) + " outward phases");

  const double len0 = net.length();
  const auto areas0 = phase_areas_unchecked(net);
  std::map<std::size_t, double> disp;
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    if (node_mark[i]) {
      const Vec2 q = dom.project_to_inner_parallel(net.nodes[i].pos, s);
      disp[find(i)] = std::max(disp[find(i)], (q - net.nodes[i].pos).norm());
      r.network.nodes[i].pos = q;
    }
  for (std::size_t e = 0; e < net.edges.size(); ++e)
    for (std::size_t i = 0; i < net.edges[e].interior.size(); ++i)
      if (pt_mark[e][i]) {
        const Vec2 q = dom.project_to_inner_parallel(net.edges[e].interior[i], s);
        const std::size_t root = find(offset[e] + i);
        disp[root] = std::max(disp[root], (q - net.edges[e].interior[i]).norm());
        r.network.edges[e].interior[i] = q;
      }
  MoveRecord rec{MoveKind::Retract, r.network.length() - len0, 0.0,
                 area_change(areas0, phase_areas_unchecked(r.network)), {}, true,
                 std::to_string(disp.size()) + " component(s)"};
  for (const auto& [root, d] : disp) rec.max_displacement = std::max(rec.max_displacement, d);
  r.moves.push_back(std::move(rec));
  return r;
}

// ---------------------------------------------------------------------------
// Flow.

struct FlowOptions {
  double h_max = 0.01;
  bool hard_pin = false;
  int max_halvings = 4;
  /// Anchors may leave the boundary by this much before a step is rejected.
  double anchor_tolerance = 1e-6;
  int lattice_refinement = 4;
};

struct FlowStepResult {
  LabeledNetwork network;
  MoveRecord record;
  std::vector<double> displacements;
  double dt_used = 0.0;
  int halvings = 0;
};

/// Velocity field eta * h_eps evaluated at every network point.
struct PointVelocities {
  std::vector<Vec2> nodes;
  std::vector<std::vector<Vec2>> interior;
};

inline PointVelocities damped_velocities(const LabeledNetwork& net, const CurvatureField& h, const DampingField& eta) {
  PointVelocities v;
  v.nodes.resize(net.nodes.size());
  for (std::size_t i = 0; i < net.nodes.size(); ++i) v.nodes[i] = eta.eta(net.nodes[i].pos) * h(net.nodes[i].pos);
  v.interior.resize(net.edges.size());
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    v.interior[e].resize(net.edges[e].interior.size());
    for (std::size_t i = 0; i < net.edges[e].interior.size(); ++i) {
      const Vec2& p = net.edges[e].interior[i];
      v.interior[e][i] = eta.eta(p) * h(p);
    }
  }
  return v;
}

inline FlowStepResult flow_step(const LabeledNetwork& net, const CurvatureField& h, const DampingField& damping,
                                double dt, const FlowOptions& opt);

/// x -> x + eta(x) h_eps(x) dt for every point, with step halving on loss of
/// embeddedness, followed by equal-arc-length redistribution.
inline FlowStepResult flow_step(const LabeledNetwork& net, const VarifoldSlice& s, const SmoothingKernel<2>& kernel,
                                const DampingField& damping, double dt, const FlowOptions& opt = {}) {
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  if (s.source_hash != network_hash(net)) throw ParameterError("slice was not generated from this network");
  return flow_step(net, CurvatureField(s, kernel, opt.lattice_refinement), damping, dt, opt);
}

/// Same step with the curvature field of `net` already built.
inline FlowStepResult flow_step(const LabeledNetwork& net, const CurvatureField& h, const DampingField& damping,
                                double dt, const FlowOptions& opt) {
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  const auto v = damped_velocities(net, h, damping);
  ValidationOptions vopt;
  vopt.anchor_tolerance = opt.anchor_tolerance;
  vopt.geometry_only = true;
  double step = dt;
  for (int attempt = 0; attempt <= opt.max_halvings; ++attempt, step *= 0.5) {
    FlowStepResult r{net, MoveRecord{MoveKind::Flow, 0.0, 0.0, {}, {}, true, {}}, {}, step, attempt};
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
      if (opt.hard_pin && net.nodes[i].kind == NodeKind::Anchor) {
        r.displacements.push_back(0.0);
        continue;
      }
      r.network.nodes[i].pos += step * v.nodes[i];
      r.displacements.push_back(step * v.nodes[i].norm());
    }
    for (std::size_t e = 0; e < net.edges.size(); ++e)
      for (std::size_t i = 0; i < net.edges[e].interior.size(); ++i) {
        r.network.edges[e].interior[i] += step * v.interior[e][i];
        r.displacements.push_back(step * v.interior[e][i].norm());
      }
    if (!validate(r.network, vopt).empty()) continue;
    r.network = redistribute(r.network, opt.h_max);
    r.record.length_delta = r.network.length() - net.length();
    r.record.max_displacement = r.displacements.empty() ? 0.0 : *std::max_element(r.displacements.begin(), r.displacements.end());
    r.record.area_deltas = area_change(phase_areas_unchecked(net), phase_areas_unchecked(r.network));
    return r;
  }
  throw StepSizeError("flow step lost embeddedness after " + std::to_string(opt.max_halvings) + " halvings");
}

// ---------------------------------------------------------------------------
// Motion bound.

struct MotionBoundReport {
  bool pass = true;
  double max_displacement = 0.0;
  double bound = 0.0;
  std::size_t exceedances = 0;
  std::size_t count = 0;
  /// Counts of displacements in decades [1e-k-1, 1e-k), k = 0..16, last bin below.
  std::vector<std::size_t> histogram;
};

/// Paper mode: every displacement must be at most 2 eps^{kappa-2}. Desk mode:
/// displacements above `desk_cap` are counted, never clamped.
inline MotionBoundReport motion_bound_check(const std::vector<double>& displacements, double eps, int kappa,
                                            SchemeMode mode, double desk_cap) {
  MotionBoundReport r;
  r.bound = mode == SchemeMode::Paper ? 2.0 * std::pow(eps, kappa - 2) : desk_cap;
  r.histogram.assign(18, 0);
  for (double d : displacements) {
    ++r.count;
    r.max_displacement = std::max(r.max_displacement, d);
    if (d > r.bound) ++r.exceedances;
    int bin = d > 0.0 ? static_cast<int>(std::floor(-std::log10(d))) : 17;
    r.histogram[static_cast<std::size_t>(std::clamp(bin, 0, 17))]++;
  }
  r.pass = r.exceedances == 0;
  return r;
}

}  // namespace brakke
