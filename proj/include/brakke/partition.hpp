#pragma once

// Labeled curve networks representing open partitions of the domain. Labels
// live on edge sides; faces are derived on demand by half-edge traversal.

#include "brakke/core.hpp"
#include "brakke/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace brakke {

enum class NodeKind { Interior, Junction, Anchor };

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Interior: return "interior";
    case NodeKind::Junction: return "junction";
    case NodeKind::Anchor: return "anchor";
  }
  return "?";
}

struct Node {
  Vec2 pos;
  NodeKind kind = NodeKind::Interior;
};

/// Polyline tail -> interior... -> head. `left`/`right` are the phases on
/// either side when walking from tail to head. A closed curve is an edge whose
/// tail and head are the same node.
struct Edge {
  std::size_t tail = 0;
  std::size_t head = 0;
  std::vector<Vec2> interior;
  Label left = 1;
  Label right = 2;
};

struct LabeledNetwork {
  ConvexDomain domain;
  int phases = 2;
  /// Phase touching the boundary when there are no anchors.
  Label boundary_label = 1;
  std::vector<Node> nodes;
  std::vector<Edge> edges;

  std::vector<Vec2> polyline(std::size_t e) const {
    const Edge& ed = edges[e];
    std::vector<Vec2> p;
    p.reserve(ed.interior.size() + 2);
    p.push_back(nodes[ed.tail].pos);
    p.insert(p.end(), ed.interior.begin(), ed.interior.end());
    p.push_back(nodes[ed.head].pos);
    return p;
  }

  double edge_length(std::size_t e) const {
    const auto p = polyline(e);
    double l = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) l += (p[i + 1] - p[i]).norm();
    return l;
  }

  double length() const {
    double l = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) l += edge_length(e);
    return l;
  }

  bool empty() const { return edges.empty(); }

  std::vector<std::size_t> anchors() const {
    std::vector<std::size_t> a;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].kind == NodeKind::Anchor) a.push_back(i);
    return a;
  }

  std::vector<int> degrees() const {
    std::vector<int> d(nodes.size(), 0);
    for (const auto& e : edges) {
      ++d[e.tail];
      ++d[e.head];
    }
    return d;
  }

  /// All polyline vertices (nodes and interior points).
  std::vector<Vec2> points() const {
    std::vector<Vec2> p;
    for (const auto& n : nodes) p.push_back(n.pos);
    for (const auto& e : edges) p.insert(p.end(), e.interior.begin(), e.interior.end());
    return p;
  }

  SegmentSet segments() const {
    SegmentSet s;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto p = polyline(e);
      for (std::size_t i = 0; i + 1 < p.size(); ++i) s.segments.push_back({p[i], p[i + 1]});
    }
    return s;
  }

  /// Drop nodes no edge refers to (anchors are kept).
  void compact_nodes() {
    const auto deg = degrees();
    std::vector<std::size_t> remap(nodes.size(), SIZE_MAX);
    std::vector<Node> kept;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (deg[i] == 0 && nodes[i].kind != NodeKind::Anchor) continue;
      remap[i] = kept.size();
      kept.push_back(nodes[i]);
    }
    for (auto& e : edges) {
      e.tail = remap[e.tail];
      e.head = remap[e.head];
    }
    nodes = std::move(kept);
  }

  /// Reassign interior/junction kinds from degrees.
  void refresh_kinds() {
    const auto deg = degrees();
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].kind != NodeKind::Anchor) nodes[i].kind = deg[i] >= 3 ? NodeKind::Junction : NodeKind::Interior;
  }
};

/// (1/2) sum of (x dy - y dx) along an open polyline.
inline double polyline_green(const std::vector<Vec2>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) s += cross(p[i], p[i + 1]);
  return 0.5 * s;
}

// ---------------------------------------------------------------------------
// Local topology.

/// One end of an edge as seen from a node.
struct EdgeEnd {
  std::size_t edge;
  bool at_tail;   // true: the edge leaves the node at its tail
  Vec2 direction; // first segment direction leaving the node
  double angle;
};

/// Incident edge ends of every node, sorted counter-clockwise by angle.
inline std::vector<std::vector<EdgeEnd>> incidence(const LabeledNetwork& net) {
  std::vector<std::vector<EdgeEnd>> inc(net.nodes.size());
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto p = net.polyline(e);
    const Vec2 dt = p[1] - p[0];
    const Vec2 dh = p[p.size() - 2] - p.back();
    inc[net.edges[e].tail].push_back({e, true, dt, std::atan2(dt.y(), dt.x())});
    inc[net.edges[e].head].push_back({e, false, dh, std::atan2(dh.y(), dh.x())});
  }
  for (auto& v : inc) std::sort(v.begin(), v.end(), [](const EdgeEnd& a, const EdgeEnd& b) { return a.angle < b.angle; });
  return inc;
}

/// Labels on the left/right of an edge when walking away from the node.
inline Label outgoing_left(const LabeledNetwork& net, const EdgeEnd& end) {
  const Edge& e = net.edges[end.edge];
  return end.at_tail ? e.left : e.right;
}
inline Label outgoing_right(const LabeledNetwork& net, const EdgeEnd& end) {
  const Edge& e = net.edges[end.edge];
  return end.at_tail ? e.right : e.left;
}

// ---------------------------------------------------------------------------
// Boundary arcs between consecutive anchors.

struct BoundaryArc {
  std::size_t from_anchor;  // node index
  std::size_t to_anchor;
  double s0, s1;            // boundary parameters (counter-clockwise from s0)
  Label label;              // phase inside the domain along the arc
  Label label_from_end;     // the same label as seen from the arriving anchor
};

namespace detail {

// Angle of v measured counter-clockwise from t, in [0, 2pi).
inline double ccw_angle_from(const Vec2& t, const Vec2& v) {
  double a = std::atan2(cross(t, v), t.dot(v));
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

}  // namespace detail

inline std::vector<BoundaryArc> boundary_arcs(const LabeledNetwork& net,
                                              const std::vector<std::vector<EdgeEnd>>& inc) {
  auto anchors = net.anchors();
  std::vector<std::pair<double, std::size_t>> order;
  for (auto a : anchors) order.push_back({net.domain.boundary_parameter(net.nodes[a].pos), a});
  std::sort(order.begin(), order.end());
  std::vector<BoundaryArc> arcs;
  const std::size_t m = order.size();
  for (std::size_t i = 0; i < m; ++i) {
    const auto [s0, a] = order[i];
    const auto [s1, b] = order[(i + 1) % m];
    BoundaryArc arc{a, b, s0, s1, net.boundary_label, net.boundary_label};
    // Label after anchor a: the right side of the incident edge closest (ccw)
    // to the boundary tangent.
    auto side_label = [&](std::size_t node, bool after) -> std::optional<Label> {
      const Vec2 nu = net.domain.boundary_normal(net.domain.nearest_boundary_point(net.nodes[node].pos));
      const Vec2 t = perp(nu);
      const EdgeEnd* best = nullptr;
      double best_angle = after ? 1e300 : -1e300;
      for (const auto& end : inc[node]) {
        const double ang = detail::ccw_angle_from(t, end.direction);
        if (after ? ang < best_angle : ang > best_angle) {
          best_angle = ang;
          best = &end;
        }
      }
      if (!best) return std::nullopt;
      return after ? outgoing_right(net, *best) : outgoing_left(net, *best);
    };
    if (auto l = side_label(a, true)) arc.label = *l;
    if (auto l = side_label(b, false)) arc.label_from_end = *l;
    arcs.push_back(arc);
  }
  return arcs;
}

inline std::vector<BoundaryArc> boundary_arcs(const LabeledNetwork& net) { return boundary_arcs(net, incidence(net)); }

// ---------------------------------------------------------------------------
// Point labelling by ray casting.

/// Phase containing p (p inside the domain and off the network), or nullopt if
/// every probe ray is degenerate.
inline std::optional<Label> label_at(const LabeledNetwork& net, const Vec2& p,
                                     const std::vector<BoundaryArc>* arcs_hint = nullptr) {
  static constexpr double kDirs[] = {0.3137, 1.9021, 4.0313, 2.7183, 5.4366};
  std::vector<BoundaryArc> own_arcs;
  const std::vector<BoundaryArc>* arcs = arcs_hint;
  if (!arcs) {
    own_arcs = boundary_arcs(net);
    arcs = &own_arcs;
  }
  for (double th : kDirs) {
    const Vec2 d(std::cos(th), std::sin(th));
    const auto exit = net.domain.ray_exit(p, d);
    if (!exit) continue;
    double best = *exit;
    std::optional<Label> found;
    bool degenerate = false;
    for (std::size_t e = 0; e < net.edges.size() && !degenerate; ++e) {
      const auto poly = net.polyline(e);
      for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        const Vec2 a = poly[i], b = poly[i + 1];
        const Vec2 s = b - a;
        const double den = cross(d, s);
        if (den == 0.0) continue;
        const double t = cross(a - p, s) / den;
        const double u = cross(a - p, d) / den;
        if (t <= 0.0 || u < 0.0 || u > 1.0) continue;
        if (t < best) {
          const double slen = s.norm();
          if (u * slen < 1e-12 || (1.0 - u) * slen < 1e-12) {
            degenerate = true;
            break;
          }
          best = t;
          found = cross(s, p - a) > 0.0 ? net.edges[e].left : net.edges[e].right;
        }
      }
    }
    if (degenerate) continue;
    if (found) return found;
    if (arcs->empty()) return net.boundary_label;
    const double period = net.domain.parameter_period();
    const double s = net.domain.boundary_parameter(p + *exit * d);
    for (const auto& arc : *arcs) {
      double s0 = arc.s0, s1 = arc.s1, ss = s;
      if (s1 <= s0) s1 += period;
      if (ss < s0) ss += period;
      if (ss >= s0 && ss <= s1) return arc.label;
    }
    return arcs->front().label;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Validation.

struct Violation {
  std::string invariant;
  std::string element;
};

struct ValidationOptions {
  double anchor_tolerance = 1e-9;
  /// Skip the (more expensive) face-labelling checks.
  bool geometry_only = false;
};

namespace detail {

struct SegmentRef {
  std::size_t edge;
  std::size_t index;
  std::size_t id_a, id_b;
  Vec2 a, b;
};

inline std::vector<SegmentRef> collect_segments(const LabeledNetwork& net) {
  std::vector<SegmentRef> segs;
  std::size_t next_id = net.nodes.size();
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto& ed = net.edges[e];
    std::vector<std::size_t> ids;
    ids.push_back(ed.tail);
    for (std::size_t i = 0; i < ed.interior.size(); ++i) ids.push_back(next_id++);
    ids.push_back(ed.head);
    const auto p = net.polyline(e);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) segs.push_back({e, i, ids[i], ids[i + 1], p[i], p[i + 1]});
  }
  return segs;
}

// Uniform grid bucketing of segments for pair tests.
template <class Fn>
void for_each_close_pair(const std::vector<SegmentRef>& segs, Fn&& fn) {
  if (segs.size() < 2) return;
  double xmin = 1e300, ymin = 1e300, xmax = -1e300, ymax = -1e300, total = 0.0;
  for (const auto& s : segs) {
    xmin = std::min({xmin, s.a.x(), s.b.x()});
    xmax = std::max({xmax, s.a.x(), s.b.x()});
    ymin = std::min({ymin, s.a.y(), s.b.y()});
    ymax = std::max({ymax, s.a.y(), s.b.y()});
    total += (s.b - s.a).norm();
  }
  const double extent = std::max(xmax - xmin, ymax - ymin);
  double cell = std::max(2.0 * total / static_cast<double>(segs.size()), extent / 512.0);
  if (!(cell > 0.0)) cell = 1.0;
  const auto nx = static_cast<long>((xmax - xmin) / cell) + 1;
  std::unordered_map<long long, std::vector<std::size_t>> grid;
  auto key = [&](long ix, long iy) { return static_cast<long long>(iy) * (nx + 1) + ix; };
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    const long x0 = static_cast<long>((std::min(s.a.x(), s.b.x()) - xmin) / cell);
    const long x1 = static_cast<long>((std::max(s.a.x(), s.b.x()) - xmin) / cell);
    const long y0 = static_cast<long>((std::min(s.a.y(), s.b.y()) - ymin) / cell);
    const long y1 = static_cast<long>((std::max(s.a.y(), s.b.y()) - ymin) / cell);
    for (long ix = x0; ix <= x1; ++ix)
      for (long iy = y0; iy <= y1; ++iy) grid[key(ix, iy)].push_back(i);
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [k, bucket] : grid)
    for (std::size_t u = 0; u < bucket.size(); ++u)
      for (std::size_t v = u + 1; v < bucket.size(); ++v)
        pairs.push_back({std::min(bucket[u], bucket[v]), std::max(bucket[u], bucket[v])});
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  for (const auto& [i, k] : pairs) fn(segs[i], segs[k]);
}

inline bool segments_conflict(const SegmentRef& s, const SegmentRef& t) {
  const bool share_a = s.id_a == t.id_a || s.id_a == t.id_b;
  const bool share_b = s.id_b == t.id_a || s.id_b == t.id_b;
  if (share_a && share_b) return true;  // parallel copies of the same chord
  if (share_a || share_b) {
    const Vec2 shared = share_a ? s.a : s.b;
    const Vec2 u = (share_a ? s.b : s.a) - shared;
    const bool t_shared_is_a = share_a ? (s.id_a == t.id_a) : (s.id_b == t.id_a);
    const Vec2 v = (t_shared_is_a ? t.b : t.a) - shared;
    const double c = cross(u, v);
    if (std::abs(c) <= 1e-14 * u.norm() * v.norm() && u.dot(v) > 0.0) return true;
    // Otherwise they can only meet again if one folds back across the other.
    const Vec2 sa = share_a ? s.b : s.a;
    const Vec2 ta = t_shared_is_a ? t.b : t.a;
    if (point_segment_distance(sa, t.a, t.b) == 0.0 || point_segment_distance(ta, s.a, s.b) == 0.0) return true;
    return false;
  }
  return segments_intersect(s.a, s.b, t.a, t.b);
}

}  // namespace detail

/// True when no two segments meet except at shared polyline vertices.
inline bool is_embedded(const LabeledNetwork& net, std::vector<Violation>* out = nullptr) {
  const auto segs = detail::collect_segments(net);
  bool ok = true;
  for (const auto& s : segs)
    if (s.a == s.b) {
      ok = false;
      if (out) out->push_back({"degenerate segment", "edge " + std::to_string(s.edge) + " segment " + std::to_string(s.index)});
    }
  detail::for_each_close_pair(segs, [&](const detail::SegmentRef& s, const detail::SegmentRef& t) {
    if (detail::segments_conflict(s, t)) {
      ok = false;
      if (out)
        out->push_back({"embeddedness", "edge " + std::to_string(s.edge) + " segment " + std::to_string(s.index) +
                                            " meets edge " + std::to_string(t.edge) + " segment " + std::to_string(t.index)});
    }
  });
  return ok;
}

namespace detail {

struct HalfEdge {
  std::size_t from, to;
  Vec2 dir_out;     // direction leaving `from`
  Label left;
  int edge = -1;    // network edge, or -1 for boundary arcs
  bool forward = true;
  double green = 0.0;
  std::size_t twin = 0;
  std::size_t next = 0;
};

}  // namespace detail

/// Face boundary cycles of the planar subdivision formed by the network and
/// the domain boundary. Each cycle lists half-edge labels and its signed area.
struct FaceCycle {
  std::vector<Label> labels;
  std::vector<int> edges;
  double signed_area = 0.0;
};

inline std::vector<FaceCycle> face_cycles(const LabeledNetwork& net) {
  using detail::HalfEdge;
  const auto inc = incidence(net);
  const auto arcs = boundary_arcs(net, inc);
  const std::size_t boundary_node = net.nodes.size();  // pseudo node for anchor-free boundary loops
  std::vector<HalfEdge> he;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto p = net.polyline(e);
    const double g = polyline_green(p);
    const auto& ed = net.edges[e];
    HalfEdge f{ed.tail, ed.head, p[1] - p[0], ed.left, static_cast<int>(e), true, g};
    HalfEdge b{ed.head, ed.tail, p[p.size() - 2] - p.back(), ed.right, static_cast<int>(e), false, -g};
    f.twin = he.size() + 1;
    b.twin = he.size();
    he.push_back(f);
    he.push_back(b);
  }
  if (arcs.empty()) {
    const double g = net.domain.area();
    HalfEdge f{boundary_node, boundary_node, Vec2::UnitX(), net.boundary_label, -1, true, g};
    HalfEdge b{boundary_node, boundary_node, -Vec2::UnitX(), 0, -1, false, -g};
    f.twin = he.size() + 1;
    b.twin = he.size();
    f.next = he.size();
    b.next = he.size() + 1;
    he.push_back(f);
    he.push_back(b);
  } else {
    for (const auto& arc : arcs) {
      const Vec2 t0 = perp(net.domain.boundary_normal(net.domain.nearest_boundary_point(net.nodes[arc.from_anchor].pos)));
      const Vec2 t1 = perp(net.domain.boundary_normal(net.domain.nearest_boundary_point(net.nodes[arc.to_anchor].pos)));
      const double g = arcs.size() == 1 ? net.domain.area() : net.domain.boundary_green(arc.s0, arc.s1);
      HalfEdge f{arc.from_anchor, arc.to_anchor, t0, arc.label, -1, true, g};
      HalfEdge b{arc.to_anchor, arc.from_anchor, -t1, 0, -1, false, -g};
      f.twin = he.size() + 1;
      b.twin = he.size();
      he.push_back(f);
      he.push_back(b);
    }
  }
  // Outgoing half-edges per node, counter-clockwise.
  std::vector<std::vector<std::size_t>> out(net.nodes.size() + 1);
  for (std::size_t h = 0; h < he.size(); ++h)
    if (he[h].from != boundary_node) out[he[h].from].push_back(h);
  for (auto& v : out)
    std::sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) {
      return std::atan2(he[a].dir_out.y(), he[a].dir_out.x()) < std::atan2(he[b].dir_out.y(), he[b].dir_out.x());
    });
  std::vector<std::size_t> pos(he.size(), 0);
  for (auto& v : out)
    for (std::size_t i = 0; i < v.size(); ++i) pos[v[i]] = i;
  for (std::size_t h = 0; h < he.size(); ++h) {
    if (he[h].to == boundary_node) continue;
    const auto& ring = out[he[h].to];
    const std::size_t t = he[h].twin;
    he[h].next = ring[(pos[t] + ring.size() - 1) % ring.size()];
  }
  std::vector<FaceCycle> cycles;
  std::vector<bool> seen(he.size(), false);
  for (std::size_t h0 = 0; h0 < he.size(); ++h0) {
    if (seen[h0]) continue;
    FaceCycle c;
    std::size_t h = h0;
    for (std::size_t guard = 0; !seen[h] && guard <= he.size(); ++guard) {
      seen[h] = true;
      c.labels.push_back(he[h].left);
      c.edges.push_back(he[h].edge);
      c.signed_area += he[h].green;
      h = he[h].next;
    }
    cycles.push_back(std::move(c));
  }
  return cycles;
}

/// Connected components of the network (by node).
struct Components {
  std::vector<std::size_t> of_node;
  std::vector<bool> anchored;
  std::size_t count = 0;
};

inline Components components(const LabeledNetwork& net) {
  std::vector<std::size_t> parent(net.nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : net.edges) parent[find(e.tail)] = find(e.head);
  Components c;
  c.of_node.assign(net.nodes.size(), 0);
  std::map<std::size_t, std::size_t> ids;
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const auto [it, fresh] = ids.emplace(find(i), ids.size());
    c.of_node[i] = it->second;
  }
  c.count = ids.size();
  c.anchored.assign(c.count, false);
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    if (net.nodes[i].kind == NodeKind::Anchor) c.anchored[c.of_node[i]] = true;
  return c;
}

/// Label of the face surrounding component `id`: cast a ray from its leftmost
/// point, ignoring the component's own segments.
inline std::optional<Label> label_outside_component(const LabeledNetwork& net, const Components& comp,
                                                    std::size_t id, const std::vector<BoundaryArc>& arcs) {
  Vec2 start(std::numeric_limits<double>::infinity(), 0.0);
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    if (comp.of_node[net.edges[e].tail] != id) continue;
    for (const auto& q : net.polyline(e))
      if (q.x() < start.x()) start = q;
  }
  if (!std::isfinite(start.x())) return std::nullopt;
  for (double th : {kPi, kPi + 0.0123, kPi - 0.0371, kPi + 0.1013}) {
    const Vec2 d(std::cos(th), std::sin(th));
    const auto exit = net.domain.ray_exit(start, d);
    if (!exit) continue;
    double best = *exit;
    std::optional<Label> found;
    bool degenerate = false;
    for (std::size_t e = 0; e < net.edges.size() && !degenerate; ++e) {
      if (comp.of_node[net.edges[e].tail] == id) continue;
      const auto poly = net.polyline(e);
      for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        const Vec2 a = poly[i], s = poly[i + 1] - a;
        const double den = cross(d, s);
        if (den == 0.0) continue;
        const double t = cross(a - start, s) / den;
        const double u = cross(a - start, d) / den;
        if (t <= 0.0 || u < 0.0 || u > 1.0 || t >= best) continue;
        const double slen = s.norm();
        if (u * slen < 1e-12 || (1.0 - u) * slen < 1e-12) {
          degenerate = true;
          break;
        }
        best = t;
        found = cross(s, start - a) > 0.0 ? net.edges[e].left : net.edges[e].right;
      }
    }
    if (degenerate) continue;
    if (found) return found;
    if (arcs.empty()) return net.boundary_label;
    const double period = net.domain.parameter_period();
    const double sb = net.domain.boundary_parameter(start + *exit * d);
    for (const auto& arc : arcs) {
      double s0 = arc.s0, s1 = arc.s1, ss = sb;
      if (s1 <= s0) s1 += period;
      if (ss < s0) ss += period;
      if (ss >= s0 && ss <= s1) return arc.label;
    }
    return arcs.front().label;
  }
  return std::nullopt;
}

inline std::vector<Violation> validate(const LabeledNetwork& net, const ValidationOptions& opt = {}) {
  std::vector<Violation> v;
  if (net.phases < 1) v.push_back({"phase count", "N=" + std::to_string(net.phases)});
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto& ed = net.edges[e];
    const std::string name = "edge " + std::to_string(e);
    if (ed.tail >= net.nodes.size() || ed.head >= net.nodes.size()) {
      v.push_back({"edge endpoints", name});
      return v;
    }
    if (ed.left == ed.right) v.push_back({"phase separation", name});
    if (ed.left < 1 || ed.left > net.phases || ed.right < 1 || ed.right > net.phases)
      v.push_back({"label range", name});
    if (ed.tail == ed.head && ed.interior.size() < 2) v.push_back({"closed curve needs at least three points", name});
    for (std::size_t i = 0; i < ed.interior.size(); ++i)
      if (!(net.domain.signed_distance(ed.interior[i]) > 0.0))
        v.push_back({"interior points inside domain", name + " point " + std::to_string(i)});
  }
  const auto deg = net.degrees();
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const auto& n = net.nodes[i];
    const std::string name = "node " + std::to_string(i);
    const double sd = net.domain.signed_distance(n.pos);
    if (n.kind == NodeKind::Anchor) {
      if (std::abs(sd) > opt.anchor_tolerance) v.push_back({"anchor on boundary", name});
      if (deg[i] < 1) v.push_back({"anchor degree", name});
    } else {
      if (!(sd > 0.0)) v.push_back({"interior vertices inside domain", name});
      if (deg[i] < 2) v.push_back({"free end", name});
    }
  }
  if (!net.edges.empty() && !(net.length() > 0.0)) v.push_back({"positive length", "network"});
  if (net.anchors().empty() && (net.boundary_label < 1 || net.boundary_label > net.phases))
    v.push_back({"boundary label", std::to_string(net.boundary_label)});
  if (!v.empty()) return v;
  if (!is_embedded(net, &v)) return v;
  if (opt.geometry_only) return v;

  const auto inc = incidence(net);
  const auto arcs = boundary_arcs(net, inc);
  for (const auto& arc : arcs)
    if (arc.label != arc.label_from_end)
      v.push_back({"label consistency", "boundary arc from node " + std::to_string(arc.from_anchor)});
  // Around every node, the sector after each edge must agree with the sector
  // before the next one.
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const auto& ring = inc[i];
    if (net.nodes[i].kind == NodeKind::Anchor || ring.size() < 2) continue;
    for (std::size_t k = 0; k < ring.size(); ++k) {
      const auto& a = ring[k];
      const auto& b = ring[(k + 1) % ring.size()];
      if (outgoing_left(net, a) != outgoing_right(net, b))
        v.push_back({"label consistency", "node " + std::to_string(i) + " sector " + std::to_string(k)});
    }
  }
  if (!v.empty()) return v;
  const auto cycles = face_cycles(net);
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    const auto& cyc = cycles[c];
    if (std::adjacent_find(cyc.labels.begin(), cyc.labels.end(), std::not_equal_to<>()) != cyc.labels.end())
      v.push_back({"label consistency", "face cycle " + std::to_string(c)});
  }
  if (!v.empty()) return v;
  // A component not attached to the boundary is a hole in some face; the label
  // on its outer (clockwise) cycle must match the label of that face.
  const auto comp = components(net);
  for (std::size_t c = 0; c < cycles.size(); ++c) {
    const auto& cyc = cycles[c];
    if (!(cyc.signed_area < 0.0) || cyc.edges.empty() || cyc.edges.front() < 0) continue;
    const std::size_t id = comp.of_node[net.edges[static_cast<std::size_t>(cyc.edges.front())].tail];
    if (comp.anchored[id]) continue;
    const auto got = label_outside_component(net, comp, id, arcs);
    if (got && *got != cyc.labels.front()) v.push_back({"face labelling", "face cycle " + std::to_string(c)});
  }
  return v;
}

// ---------------------------------------------------------------------------
// Areas and lengths.

struct PhaseAreaVector {
  std::vector<double> areas;  // index i holds phase i+1

  double total() const { return std::accumulate(areas.begin(), areas.end(), 0.0); }
  double operator[](Label l) const { return areas.at(static_cast<std::size_t>(l - 1)); }
};

/// Green's-theorem areas; no validity check.
inline PhaseAreaVector phase_areas_unchecked(const LabeledNetwork& net) {
  PhaseAreaVector out;
  out.areas.assign(static_cast<std::size_t>(net.phases), 0.0);
  auto add = [&](Label l, double a) {
    if (l >= 1 && l <= net.phases) out.areas[static_cast<std::size_t>(l - 1)] += a;
  };
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const double g = polyline_green(net.polyline(e));
    add(net.edges[e].left, g);
    add(net.edges[e].right, -g);
  }
  const auto arcs = boundary_arcs(net);
  if (arcs.empty()) add(net.boundary_label, net.domain.area());
  else if (arcs.size() == 1) add(arcs[0].label, net.domain.area());
  else
    for (const auto& arc : arcs) add(arc.label, net.domain.boundary_green(arc.s0, arc.s1));
  return out;
}

inline PhaseAreaVector phase_areas(const LabeledNetwork& net) {
  const auto v = validate(net);
  if (!v.empty()) throw StructuralError("phase_areas on invalid network: " + v.front().invariant + " (" + v.front().element + ")");
  return phase_areas_unchecked(net);
}

/// Length of the network bordering each phase (the discrete perimeter of E_i in U).
inline std::vector<double> phase_border_lengths(const LabeledNetwork& net) {
  std::vector<double> b(static_cast<std::size_t>(net.phases), 0.0);
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const double l = net.edge_length(e);
    b[static_cast<std::size_t>(net.edges[e].left - 1)] += l;
    b[static_cast<std::size_t>(net.edges[e].right - 1)] += l;
  }
  return b;
}

// ---------------------------------------------------------------------------
// Refinement.

/// Subdivide every polyline segment longer than h_max into equal pieces.
inline LabeledNetwork resample(const LabeledNetwork& net, double h_max) {
  if (!(h_max > 0.0)) throw ParameterError("h_max must be positive");
  LabeledNetwork out = net;
  for (std::size_t e = 0; e < out.edges.size(); ++e) {
    const auto p = net.polyline(e);
    std::vector<Vec2> interior;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      if (i > 0) interior.push_back(p[i]);
      const double len = (p[i + 1] - p[i]).norm();
      const auto pieces = static_cast<int>(std::ceil(len / h_max - 1e-12));
      for (int k = 1; k < pieces; ++k) interior.push_back(p[i] + (static_cast<double>(k) / pieces) * (p[i + 1] - p[i]));
    }
    out.edges[e].interior = std::move(interior);
  }
  return out;
}

/// Replaces the interior points of every edge by ceil(length / h_max) - 1
/// points at equal arc length along the old polyline. Nodes stay fixed, so the
/// geometry changes only by corner cutting; uneven spacing left by tangential
/// motion does not accumulate.
inline LabeledNetwork redistribute(const LabeledNetwork& net, double h_max) {
  if (!(h_max > 0.0)) throw ParameterError("h_max must be positive");
  LabeledNetwork out = net;
  for (std::size_t e = 0; e < out.edges.size(); ++e) {
    const auto p = net.polyline(e);
    std::vector<double> s(p.size(), 0.0);
    for (std::size_t i = 1; i < p.size(); ++i) s[i] = s[i - 1] + (p[i] - p[i - 1]).norm();
    const double total = s.back();
    const auto pieces = std::max(1, static_cast<int>(std::ceil(total / h_max - 1e-12)));
    std::vector<Vec2> interior;
    interior.reserve(static_cast<std::size_t>(pieces));
    std::size_t seg = 0;
    for (int k = 1; k < pieces; ++k) {
      const double target = total * k / pieces;
      while (seg + 2 < p.size() && s[seg + 1] < target) ++seg;
      const double len = s[seg + 1] - s[seg];
      const double u = len > 0.0 ? std::clamp((target - s[seg]) / len, 0.0, 1.0) : 0.0;
      interior.push_back(p[seg] + u * (p[seg + 1] - p[seg]));
    }
    out.edges[e].interior = std::move(interior);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sliver control.

struct RepairEvent {
  std::string what;
  double area;
};

/// Remove closed curves and two-edge lenses enclosing less than `min_area`;
/// the enclosed sliver is absorbed by the surrounding phase.
inline std::vector<RepairEvent> repair_degenerate_faces(LabeledNetwork& net, double min_area = 1e-12) {
  std::vector<RepairEvent> log;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
      const auto& ed = net.edges[e];
      if (ed.tail != ed.head) continue;
      const double a = std::abs(polyline_green(net.polyline(e)));
      if (a < min_area) {
        log.push_back({"closed curve removed", a});
        net.edges.erase(net.edges.begin() + static_cast<long>(e));
        changed = true;
        break;
      }
    }
    if (changed) continue;
    for (std::size_t e = 0; e < net.edges.size() && !changed; ++e)
      for (std::size_t f = e + 1; f < net.edges.size() && !changed; ++f) {
        const auto& a = net.edges[e];
        const auto& b = net.edges[f];
        const bool same = a.tail == b.tail && a.head == b.head;
        const bool flipped = a.tail == b.head && a.head == b.tail;
        if (!(same || flipped) || a.tail == a.head) continue;
        auto pa = net.polyline(e);
        auto pb = net.polyline(f);
        if (same) std::reverse(pb.begin(), pb.end());
        const double area = std::abs(polyline_green(pa) + polyline_green(pb));
        if (area >= min_area) continue;
        // The lens between a and b holds one phase; outside labels survive.
        Edge merged = a;
        const Label lens = (a.left == (same ? b.right : b.left)) ? a.left : a.right;
        merged.left = lens == a.left ? (same ? b.left : b.right) : a.left;
        merged.right = lens == a.right ? (same ? b.right : b.left) : a.right;
        log.push_back({"lens merged", area});
        net.edges[e] = merged;
        net.edges.erase(net.edges.begin() + static_cast<long>(f));
        changed = true;
      }
  }
  net.compact_nodes();
  net.refresh_kinds();
  return log;
}

}  // namespace brakke
