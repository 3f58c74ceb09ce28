#pragma once

// Diagnostics along a trajectory: test-function masses and Brakke integrands,
// dissipation, junction angles, phase-area continuity, hull confinement and
// boundary fidelity.

#include "brakke/core.hpp"
#include "brakke/cutoff.hpp"
#include "brakke/geometry.hpp"
#include "brakke/kernel.hpp"
#include "brakke/partition.hpp"
#include "brakke/varifold.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace brakke {

// ---------------------------------------------------------------------------
// Test functions.

struct TestFunction {
  std::string name;
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> gradient;
  std::function<Mat2(const Vec2&)> hessian;
  /// Smallest j with |grad phi| <= j phi and ||hess phi|| <= j phi on the samples.
  double class_a_j = 0.0;
  /// Largest sampled value (must not exceed 1).
  double max_value = 0.0;
  /// Non-decreasing along the outward normal outside D_j (sampled).
  bool radially_nondecreasing = false;

  bool admissible(double j) const { return max_value <= 1.0 + 1e-12 && class_a_j <= j && radially_nondecreasing; }
};

/// Separating line A = {x : (x - point) . normal = 0}, with A+ on the side of
/// `normal`, and a disk C inside A+ where mass is measured.
struct BarrierSpec {
  Vec2 point = Vec2::Zero();
  Vec2 normal = Vec2::UnitY();
  Vec2 probe_center = Vec2::Zero();
  double probe_radius = 0.0;
};

class TestFunctionFamily {
 public:
  TestFunctionFamily() = default;

  /// phi = 1, a centered Gaussian, a floored bump on a central disk and, when
  /// given, the barrier (s + d_A^4) / (s + max d_A^4). Tags are verified at
  /// construction by sampling the domain and the boundary band outside D_j.
  static TestFunctionFamily standard(const ConvexDomain& domain, double j,
                                     const std::optional<BarrierSpec>& barrier = std::nullopt) {
    TestFunctionFamily f;
    const Vec2 c = domain.center();
    const double size = bounding_half_width(domain);
    f.add(constant_one());
    f.add(gaussian(c, 0.3 * size));
    f.add(bump(c, 0.5 * size, 0.05));
    if (barrier) f.add(barrier_function(domain, *barrier, 0.01));
    f.verify(domain, j);
    return f;
  }

  void add(TestFunction t) { fns_.push_back(std::move(t)); }
  const std::vector<TestFunction>& functions() const { return fns_; }
  std::size_t size() const { return fns_.size(); }

  std::vector<std::string> names() const {
    std::vector<std::string> n;
    for (const auto& t : fns_) n.push_back(t.name);
    return n;
  }

  std::optional<std::size_t> index_of(const std::string& name) const {
    for (std::size_t i = 0; i < fns_.size(); ++i)
      if (fns_[i].name == name) return i;
    return std::nullopt;
  }

  /// Dense sampling of the tags: `samples` points inside the domain and as many
  /// in the band between the boundary and D_j.
  void verify(const ConvexDomain& domain, double j, int samples = 10000) {
    const RegionIndex idx{j, 0};
    const auto inner = domain_samples(domain, samples);
    const auto band = band_samples(domain, std::min(idx.d_threshold(), domain.tube_width()), samples);
    for (auto& t : fns_) {
      double ratio = 0.0, mx = 0.0;
      for (const auto& x : inner) {
        const double v = t.value(x);
        mx = std::max(mx, v);
        const double g = t.gradient(x).norm();
        const Eigen::SelfAdjointEigenSolver<Mat2> es(t.hessian(x));
        const double hn = es.eigenvalues().cwiseAbs().maxCoeff();
        ratio = std::max(ratio, std::max(g, hn) / v);
      }
      t.class_a_j = std::ceil(ratio);
      t.max_value = mx;
      bool mono = true;
      for (const auto& x : band) {
        const Vec2 nu = domain.boundary_normal(domain.nearest_boundary_point(x));
        if (t.gradient(x).dot(nu) < -1e-12) mono = false;
      }
      t.radially_nondecreasing = mono;
    }
  }

  static TestFunction constant_one() {
    return {"one", [](const Vec2&) { return 1.0; }, [](const Vec2&) { return Vec2(Vec2::Zero()); },
            [](const Vec2&) { return Mat2(Mat2::Zero()); }};
  }

  static TestFunction gaussian(const Vec2& c, double sigma) {
    const double s2 = sigma * sigma;
    auto val = [c, s2](const Vec2& x) { return std::exp(-(x - c).squaredNorm() / (2 * s2)); };
    return {"gauss", val, [c, s2, val](const Vec2& x) { return Vec2(-(x - c) / s2 * val(x)); },
            [c, s2, val](const Vec2& x) {
              const Vec2 d = x - c;
              return Mat2((d * d.transpose() / (s2 * s2) - Mat2::Identity() / s2) * val(x));
            }};
  }

  /// s + (1 - s) b(|x - c| / r), b(q) = exp(1 - 1 / (1 - q^2)) on q < 1.
  static TestFunction bump(const Vec2& c, double r, double s) {
    auto b = [](double q) { return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q * q)) : 0.0; };
    auto val = [=](const Vec2& x) { return s + (1 - s) * b((x - c).norm() / r); };
    // b'(q) / q = -2 b / (1 - q^2)^2 and b''(q) = b (4 q^2 / (1 - q^2)^4 - 2 (1 + 3 q^2) / (1 - q^2)^3).
    auto grad = [=](const Vec2& x) {
      const Vec2 d = (x - c) / r;
      const double q = d.norm();
      if (q >= 1.0) return Vec2(Vec2::Zero());
      const double u = 1.0 - q * q;
      return Vec2((1 - s) * (-2.0 * b(q) / (u * u)) * d / r);
    };
    auto hess = [=](const Vec2& x) {
      const Vec2 d = (x - c) / r;
      const double q = d.norm();
      if (q >= 1.0) return Mat2(Mat2::Zero());
      const double u = 1.0 - q * q;
      const double bq = b(q);
      const double b1_over_q = -2.0 * bq / (u * u);
      const double b2 = bq * (4 * q * q / (u * u * u * u) - 2 * (1 + 3 * q * q) / (u * u * u));
      Mat2 h = b1_over_q * Mat2::Identity();
      if (q > 0.0) {
        const Vec2 e = d / q;
        h += (b2 - b1_over_q) * e * e.transpose();
      }
      return Mat2((1 - s) * h / (r * r));
    };
    return {"bump", val, grad, hess};
  }

  /// (s + d_A^4) / (s + D^4) with d_A = max((x - p) . n, 0) and D the largest
  /// d_A over the domain, so phi <= 1 on the domain.
  static TestFunction barrier_function(const ConvexDomain& domain, const BarrierSpec& spec, double s) {
    const Vec2 n = spec.normal.normalized();
    const Vec2 p = spec.point;
    double dmax = 0.0;
    for (const auto& x : domain_samples(domain, 4000)) dmax = std::max(dmax, (x - p).dot(n));
    for (int i = 0; i < 4096; ++i)
      dmax = std::max(dmax, (domain.boundary_point(domain.parameter_period() * i / 4096.0) - p).dot(n));
    const double scale = 1.0 / (s + std::pow(std::max(dmax, 0.0), 4));
    auto d = [=](const Vec2& x) { return std::max((x - p).dot(n), 0.0); };
    return {"barrier", [=](const Vec2& x) { return scale * (s + std::pow(d(x), 4)); },
            [=](const Vec2& x) { return Vec2(scale * 4 * std::pow(d(x), 3) * n); },
            [=](const Vec2& x) { return Mat2(scale * 12 * d(x) * d(x) * n * n.transpose()); }};
  }

 private:
  std::vector<TestFunction> fns_;

  static double bounding_half_width(const ConvexDomain& domain) {
    double r = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 256; ++i)
      r = std::min(r, (domain.boundary_point(domain.parameter_period() * i / 256.0) - domain.center()).norm());
    return r;
  }

  static std::vector<Vec2> domain_samples(const ConvexDomain& domain, int samples) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (int i = 0; i < 512; ++i) {
      const Vec2 q = domain.boundary_point(domain.parameter_period() * i / 512.0);
      xmin = std::min(xmin, q.x()), xmax = std::max(xmax, q.x());
      ymin = std::min(ymin, q.y()), ymax = std::max(ymax, q.y());
    }
    std::vector<Vec2> out;
    const int m = static_cast<int>(std::ceil(std::sqrt(samples * 4.0 / kPi)));
    for (int a = 0; a < m && static_cast<int>(out.size()) < samples; ++a)
      for (int b = 0; b < m; ++b) {
        const Vec2 x(xmin + (xmax - xmin) * (a + 0.5) / m, ymin + (ymax - ymin) * (b + 0.5) / m);
        if (domain.contains(x)) out.push_back(x);
      }
    return out;
  }

  static std::vector<Vec2> band_samples(const ConvexDomain& domain, double depth, int samples) {
    std::vector<Vec2> out;
    const int layers = 10, per = std::max(1, samples / layers);
    for (int l = 0; l < layers; ++l)
      for (int i = 0; i < per; ++i) {
        const Vec2 q = domain.boundary_point(domain.parameter_period() * (i + 0.5) / per);
        const Vec2 nu = domain.boundary_normal(q);
        out.push_back(q - depth * (l + 0.5) / layers * nu);
      }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Records.

struct DiagnosticsRecord {
  double t = 0.0;
  std::int64_t epoch = 0;
  double length = 0.0;
  /// ||V||(phi_q) for each family member.
  std::vector<double> masses;
  /// sum w eta (-phi |h|^2 + h . grad phi) for each family member.
  std::vector<double> brakke_integrands;
  /// sum w eta |h|^2.
  double dissipation_integrand = 0.0;
  double max_eta_h = 0.0;
  /// As max_eta_h with the tangential part removed along edges; nodes keep
  /// the full vector. Tangential motion only reparametrizes the curve.
  double max_eta_h_normal = 0.0;
  std::vector<double> junction_angles;
  std::vector<double> phase_areas;
  double hull_margin = 0.0;
  double boundary_drift = 0.0;
  /// Mass of the network inside the barrier probe disk (0 without a barrier).
  double probe_mass = 0.0;
  // Path quantities accumulated over the epochs up to t.
  double cumulative_dissipation = 0.0;
  std::vector<double> cumulative_brakke;
  std::int64_t moves_accepted = 0;
  std::int64_t moves_rejected = 0;
  std::int64_t surgeries = 0;
  std::int64_t exceedances = 0;
  std::int64_t halvings = 0;
  double excess = 0.0;
};

/// Sorted angles (degrees) between consecutive incident edges at every
/// junction, junctions in node order.
inline std::vector<std::vector<double>> junction_angle_sets(const LabeledNetwork& net) {
  std::vector<std::vector<double>> out;
  const auto inc = incidence(net);
  for (std::size_t v = 0; v < net.nodes.size(); ++v) {
    if (net.nodes[v].kind != NodeKind::Junction) continue;
    const auto& ring = inc[v];
    std::vector<double> a;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      double d = ring[(i + 1) % ring.size()].angle - ring[i].angle;
      if (i + 1 == ring.size()) d += 2 * kPi;
      a.push_back(d * 180.0 / kPi);
    }
    std::sort(a.begin(), a.end());
    out.push_back(std::move(a));
  }
  return out;
}

inline std::vector<double> junction_angles(const LabeledNetwork& net) {
  std::vector<double> flat;
  for (const auto& s : junction_angle_sets(net)) flat.insert(flat.end(), s.begin(), s.end());
  return flat;
}

/// Length of the network inside a disk.
inline double mass_in_disk(const LabeledNetwork& net, const Vec2& c, double r) {
  double m = 0.0;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto p = net.polyline(e);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      const Vec2 a = p[i] - c, d = p[i + 1] - p[i];
      const double A = d.squaredNorm(), B = 2 * a.dot(d), C = a.squaredNorm() - r * r;
      if (A == 0.0) continue;
      const double disc = B * B - 4 * A * C;
      if (disc <= 0.0) continue;
      const double t0 = std::max(0.0, (-B - std::sqrt(disc)) / (2 * A));
      const double t1 = std::min(1.0, (-B + std::sqrt(disc)) / (2 * A));
      if (t1 > t0) m += (t1 - t0) * std::sqrt(A);
    }
  }
  return m;
}

/// Fixed reference data of a run: the hull of the initial network (with its
/// anchors) and the anchor positions.
struct RunReference {
  ConvexHull hull;
  std::vector<Vec2> anchors;
  std::optional<BarrierSpec> barrier;

  static RunReference of(const LabeledNetwork& initial, const std::optional<BarrierSpec>& barrier = std::nullopt) {
    RunReference r;
    const auto pts = initial.points();
    r.hull = convex_hull(pts);
    for (auto a : initial.anchors()) r.anchors.push_back(initial.nodes[a].pos);
    r.barrier = barrier;
    return r;
  }

  /// Smallest hull margin over the network points (positive inside).
  double margin(const LabeledNetwork& net) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : net.points()) m = std::min(m, hull.margin(p));
    return m;
  }

  /// Largest distance from a current anchor to the initial anchor set.
  double drift(const LabeledNetwork& net) const {
    double d = 0.0;
    for (auto a : net.anchors()) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : anchors) best = std::min(best, (net.nodes[a].pos - q).norm());
      if (!anchors.empty()) d = std::max(d, best);
    }
    return d;
  }
};

/// Instantaneous fields of a snapshot, computed from the network alone.
struct SnapshotEvaluation {
  DiagnosticsRecord record;
  CurvatureField field;
};

inline SnapshotEvaluation evaluate_snapshot(const LabeledNetwork& net, double t, std::int64_t epoch,
                                            const TestFunctionFamily& family, const SmoothingKernel<2>& kernel,
                                            const DampingField& damping, const RunReference& ref, double h_quad,
                                            int refinement = 4) {
  const auto s = slice(net, h_quad);
  SnapshotEvaluation ev{{}, CurvatureField(s, kernel, refinement)};
  auto& r = ev.record;
  r.t = t;
  r.epoch = epoch;
  r.length = net.length();
  const auto& fns = family.functions();
  r.masses.assign(fns.size(), 0.0);
  r.brakke_integrands.assign(fns.size(), 0.0);
  for (const auto& smp : s.samples) {
    const Vec2 h = ev.field(smp.x);
    const double eta = damping.eta(smp.x);
    const double h2 = h.squaredNorm();
    r.dissipation_integrand += smp.w * eta * h2;
    r.max_eta_h = std::max(r.max_eta_h, eta * std::sqrt(h2));
    r.max_eta_h_normal = std::max(r.max_eta_h_normal, eta * (h - h.dot(smp.tau) * smp.tau).norm());
    for (std::size_t q = 0; q < fns.size(); ++q) {
      const double phi = fns[q].value(smp.x);
      r.masses[q] += smp.w * phi;
      r.brakke_integrands[q] += smp.w * eta * (-phi * h2 + h.dot(fns[q].gradient(smp.x)));
    }
  }
  // The driving field at the network points themselves (nodes included).
  for (const auto& p : net.points()) r.max_eta_h = std::max(r.max_eta_h, damping.eta(p) * ev.field(p).norm());
  for (const auto& nd : net.nodes)
    r.max_eta_h_normal = std::max(r.max_eta_h_normal, damping.eta(nd.pos) * ev.field(nd.pos).norm());
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto poly = net.polyline(e);
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
      const Vec2 tau = (poly[i + 1] - poly[i - 1]).normalized();
      const Vec2 h = ev.field(poly[i]);
      r.max_eta_h_normal = std::max(r.max_eta_h_normal, damping.eta(poly[i]) * (h - h.dot(tau) * tau).norm());
    }
  }
  r.junction_angles = junction_angles(net);
  r.phase_areas = phase_areas_unchecked(net).areas;
  r.hull_margin = ref.margin(net);
  r.boundary_drift = ref.drift(net);
  if (ref.barrier && ref.barrier->probe_radius > 0.0)
    r.probe_mass = mass_in_disk(net, ref.barrier->probe_center, ref.barrier->probe_radius);
  r.cumulative_brakke.assign(fns.size(), 0.0);
  return ev;
}

// ---------------------------------------------------------------------------
// Trajectory-level reports. A trajectory is any sequence of records with
// increasing t and cumulative fields filled in.

/// ||V||(phi) from t1 to t2 minus the accumulated Brakke integral.
struct ResidualReport {
  double residual = 0.0;
  double slack = 0.0;
  double dissipation = 0.0;
  bool within_slack() const { return residual <= slack; }
};

struct ResidualInputs {
  double eps;
  double h_quad;
  double h_max;
};

inline const DiagnosticsRecord& record_at(const std::vector<DiagnosticsRecord>& recs, double t) {
  for (const auto& r : recs)
    if (std::abs(r.t - t) <= 1e-9 * std::max(1.0, std::abs(t))) return r;
  throw ParameterError("no snapshot at t = " + std::to_string(t));
}

inline ResidualReport brakke_residual(const std::vector<DiagnosticsRecord>& recs, const TestFunctionFamily& family,
                                      const std::string& phi, double t1, double t2, double j,
                                      const ResidualInputs& in) {
  if (!(t1 < t2)) throw ParameterError("t1 must be smaller than t2");
  const auto q = family.index_of(phi);
  if (!q) throw ParameterError("unknown test function: " + phi);
  const auto& f = family.functions()[*q];
  if (!f.admissible(j)) throw ParameterError("test function " + phi + " is not admissible for j = " + std::to_string(j));
  const auto& a = record_at(recs, t1);
  const auto& b = record_at(recs, t2);
  ResidualReport r;
  r.residual = (b.masses[*q] - a.masses[*q]) - (b.cumulative_brakke[*q] - a.cumulative_brakke[*q]);
  r.dissipation = b.cumulative_dissipation - a.cumulative_dissipation;
  const double budget = 10.0 * (in.h_quad + in.h_max * in.h_max) * a.length * (t2 - t1);
  r.slack = (t2 - t1) * std::pow(in.eps, 1.0 / 8.0) + budget;
  return r;
}

struct DissipationReport {
  double final_plus_dissipation = 0.0;
  double initial = 0.0;
  double slack = 0.0;
  bool holds() const { return final_plus_dissipation <= initial + slack; }
};

/// Final mass plus the accumulated dissipation against the initial mass; the
/// slack is T eps^{1/6} plus the quadrature budget.
inline DissipationReport dissipation_report(const std::vector<DiagnosticsRecord>& recs, const ResidualInputs& in) {
  DissipationReport d;
  if (recs.empty()) return d;
  const auto& a = recs.front();
  const auto& b = recs.back();
  const double T = b.t - a.t;
  d.initial = a.masses.empty() ? a.length : a.masses.front();
  const double fin = b.masses.empty() ? b.length : b.masses.front();
  d.final_plus_dissipation = fin + (b.cumulative_dissipation - a.cumulative_dissipation);
  d.slack = T * std::pow(in.eps, 1.0 / 6.0) + 10.0 * (in.h_quad + in.h_max * in.h_max) * a.length * T;
  return d;
}

/// Empirical 1/2-Hoelder constant of each phase area over snapshot pairs with
/// both times at or after `t_start`.
inline std::vector<double> volume_continuity(const std::vector<DiagnosticsRecord>& recs, double t_start) {
  if (recs.size() < 3) throw ParameterError("volume continuity needs at least three snapshots");
  std::vector<double> c(recs.front().phase_areas.size(), 0.0);
  for (std::size_t a = 0; a < recs.size(); ++a) {
    if (recs[a].t < t_start) continue;
    for (std::size_t b = a + 1; b < recs.size(); ++b) {
      const double dt = std::sqrt(recs[b].t - recs[a].t);
      if (dt == 0.0) continue;
      for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = std::max(c[i], std::abs(recs[b].phase_areas[i] - recs[a].phase_areas[i]) / dt);
    }
  }
  return c;
}

struct ConfinementReport {
  double min_hull_margin = std::numeric_limits<double>::infinity();
  double max_drift = 0.0;
  double max_probe_mass = 0.0;
  std::size_t hull_violations = 0;
  std::size_t drift_violations = 0;
  bool pass() const { return hull_violations == 0 && drift_violations == 0; }
};

inline ConfinementReport confinement_and_boundary(const std::vector<DiagnosticsRecord>& recs, double h_max,
                                                  double drift_bound) {
  ConfinementReport r;
  for (const auto& rec : recs) {
    r.min_hull_margin = std::min(r.min_hull_margin, rec.hull_margin);
    r.max_drift = std::max(r.max_drift, rec.boundary_drift);
    r.max_probe_mass = std::max(r.max_probe_mass, rec.probe_mass);
    if (rec.hull_margin < -h_max) ++r.hull_violations;
    if (rec.boundary_drift > drift_bound) ++r.drift_violations;
  }
  return r;
}

}  // namespace brakke
