#pragma once

// Epoch scheduler: parameter validation, the reduce -> retract -> flow loop,
// trajectory recording and stationarity detection.

#include "brakke/core.hpp"
#include "brakke/cutoff.hpp"
#include "brakke/diagnostics.hpp"
#include "brakke/kernel.hpp"
#include "brakke/partition.hpp"
#include "brakke/steps.hpp"
#include "brakke/varifold.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace brakke {

struct FlowConfig {
  // The frozen zone of radius 2 j^{-1/8} around each anchor must cover the
  // kernel's reach, so eps stays below a seventh of it.
  double j = 1e11;
  double eps = 0.012;
  double dt = 1e-4;
  int kappa = 23;  // 3n + 20 with n = 1
  double t_end = 0.1;
  SchemeMode mode = SchemeMode::Desk;
  double h_max = 0.01;
  double h_quad = 0.005;
  /// Reduction caps; non-positive entries mean the defaults 1/j^2 and 1/j.
  ReductionCaps caps{0.0, 0.0};
  int snapshot_every = 10;
  double stationarity_tol = 1e-3;
  int stationarity_window = 20;
  bool stop_when_stationary = true;
  std::uint64_t seed = 1;
  int max_halvings = 4;
  int lattice_refinement = 4;
  /// Desk-mode displacement cap for the motion report; non-positive means h_max.
  double motion_cap = 0.0;
  double anchor_tolerance = 1e-6;
  /// Closed curves and lenses below this area are removed after each step.
  double surgery_area = 1e-10;
  std::optional<BarrierSpec> barrier;

  ReductionCaps effective_caps() const {
    return {caps.displacement > 0.0 ? caps.displacement : 1.0 / (j * j), caps.area > 0.0 ? caps.area : 1.0 / j};
  }
  double effective_motion_cap() const { return motion_cap > 0.0 ? motion_cap : h_max; }
};

inline bool operator==(const BarrierSpec& a, const BarrierSpec& b) {
  return a.point == b.point && a.normal == b.normal && a.probe_center == b.probe_center &&
         a.probe_radius == b.probe_radius;
}

inline bool operator==(const FlowConfig& a, const FlowConfig& b) {
  return a.j == b.j && a.eps == b.eps && a.dt == b.dt && a.kappa == b.kappa && a.t_end == b.t_end && a.mode == b.mode &&
         a.h_max == b.h_max && a.h_quad == b.h_quad && a.caps.displacement == b.caps.displacement &&
         a.caps.area == b.caps.area && a.snapshot_every == b.snapshot_every &&
         a.stationarity_tol == b.stationarity_tol && a.stationarity_window == b.stationarity_window &&
         a.stop_when_stationary == b.stop_when_stationary && a.seed == b.seed && a.max_halvings == b.max_halvings &&
         a.lattice_refinement == b.lattice_refinement && a.motion_cap == b.motion_cap &&
         a.anchor_tolerance == b.anchor_tolerance && a.surgery_area == b.surgery_area && a.barrier == b.barrier;
}

// ---------------------------------------------------------------------------
// Parameter conditions.

struct ConditionResult {
  std::string name;
  bool holds;
  /// log(lhs) - log(rhs); negative when the condition holds.
  double log_margin;
};

struct ParamReport {
  std::vector<ConditionResult> conditions;
  std::vector<std::string> notes;
  bool all_hold() const {
    for (const auto& c : conditions)
      if (!c.holds) return false;
    return true;
  }
};

/// The epsilon conditions and the time-step bracket, evaluated in log space so
/// that paper-scale exponents do not underflow. The smallness threshold eps_*
/// has no explicit value and is reported, not checked.
inline ParamReport validate_params(const FlowConfig& c, int n = 1) {
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(c.eps > 0.0 && c.eps < 1.0)) throw ConfigError("eps must lie in (0, 1)");
  if (!(c.j >= 1.0)) throw ConfigError("j must be at least 1");
  ParamReport r;
  const double le = std::log(c.eps), lj = std::log(c.j), kappa = c.kappa;
  auto add = [&](std::string name, double lhs, double rhs) { r.conditions.push_back({std::move(name), lhs <= rhs, lhs - rhs}); };
  add("eps^(1/6) <= 1/(2j)", le / 6.0, -std::log(2.0 * c.j));
  add("2 eps^(kappa-2) <= j^-10", std::log(2.0) + (kappa - 2) * le, -10.0 * lj);
  add("2 j eps^-kappa exp(-j^(1/8)) <= 1/(4 j^(1/4))", std::log(2.0) + lj - kappa * le - std::pow(c.j, 0.125),
      -std::log(4.0) - 0.25 * lj);
  const double ldt = std::log(c.dt);
  r.conditions.push_back({"eps^kappa / 2 < dt", kappa * le - std::log(2.0) < ldt, kappa * le - std::log(2.0) - ldt});
  add("dt <= eps^kappa", ldt, kappa * le);
  if (c.kappa != 3 * n + 20) r.notes.push_back("kappa differs from 3n + 20 = " + std::to_string(3 * n + 20));
  r.notes.push_back("eps < eps_*(n, U, M): threshold not explicit, not checked");
  if (c.mode == SchemeMode::Paper && !r.all_hold()) {
    std::string failed;
    for (const auto& cond : r.conditions)
      if (!cond.holds) failed += (failed.empty() ? "" : "; ") + cond.name;
    throw ConfigError("paper-mode parameter conditions fail: " + failed);
  }
  return r;
}

/// Each anchor must separate two different phases along the boundary.
inline std::vector<std::string> admissibility_warnings(const LabeledNetwork& net) {
  std::vector<std::string> w;
  const auto arcs = boundary_arcs(net);
  for (auto a : net.anchors()) {
    std::optional<Label> before, after;
    for (const auto& arc : arcs) {
      if (arc.to_anchor == a) before = arc.label;
      if (arc.from_anchor == a) after = arc.label;
    }
    if (before && after && *before == *after)
      w.push_back("anchor " + std::to_string(a) + " touches a single phase (" + std::to_string(*before) + ") on the boundary");
  }
  return w;
}

// ---------------------------------------------------------------------------
// Trajectory.

struct Frame {
  double t = 0.0;
  std::int64_t epoch = 0;
  LabeledNetwork network;
  DiagnosticsRecord record;
};

struct Trajectory {
  std::vector<std::string> test_functions;
  std::vector<Frame> frames;
  std::vector<std::string> warnings;
  std::optional<double> stationary_at;
  std::string failure;

  std::vector<DiagnosticsRecord> records() const {
    std::vector<DiagnosticsRecord> r;
    for (const auto& f : frames) r.push_back(f.record);
    return r;
  }
};

struct RunFailure : Error {
  RunFailure(const std::string& what, Trajectory partial_, bool step_size_)
      : Error(what), partial(std::move(partial_)), step_size(step_size_) {}
  Trajectory partial;
  bool step_size;
};

/// First time at which the last `window` records all have sup |eta h| < tol
/// and relative length change < tol. The sup is taken over the normal part
/// of eta h along edges: on a stationary junction network the smoothed
/// curvature keeps a tangential part of order h_max / eps near each junction.
inline std::optional<double> detect_stationarity(const std::vector<DiagnosticsRecord>& recs, int window, double tol) {
  if (window < 2) throw ParameterError("stationarity window must be at least 2");
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t end = w; end <= recs.size(); ++end) {
    bool ok = true;
    for (std::size_t i = end - w; i < end && ok; ++i) ok = recs[i].max_eta_h_normal < tol;
    const double l0 = recs[end - w].length, l1 = recs[end - 1].length;
    if (ok && std::abs(l1 - l0) < tol * std::max(l0, 1e-300)) return recs[end - 1].t;
  }
  return std::nullopt;
}

struct RunContext {
  SmoothingKernel<2> kernel;
  DampingField damping;
  TestFunctionFamily family;
  RunReference reference;

  RunContext(const FlowConfig& c, const LabeledNetwork& initial)
      : kernel(make_kernel<2>(c.eps)),
        damping(initial.domain, initial.segments(), c.j),
        family(TestFunctionFamily::standard(initial.domain, c.j, c.barrier)),
        reference(RunReference::of(initial, c.barrier)) {}
};

/// Epochs of reduce -> retract -> flow until t_end or stationarity. Every
/// epoch is evaluated; frames are kept every `snapshot_every` epochs and at
/// the end. `on_frame` sees each kept frame as it is produced.
inline Trajectory run(const FlowConfig& c, const LabeledNetwork& initial,
                      const std::function<void(const Frame&)>& on_frame = {}) {
  validate_params(c);
  if (c.snapshot_every < 1) throw ConfigError("snapshot_every must be at least 1");
  if (!(c.h_max > 0.0) || !(c.h_quad > 0.0)) throw ConfigError("h_max and h_quad must be positive");
  if (!(c.t_end >= 0.0)) throw ConfigError("t_end must be non-negative");
  const auto violations = validate(initial);
  if (!violations.empty())
    throw StructuralError("initial network invalid: " + violations.front().invariant + " (" + violations.front().element + ")");

  Trajectory traj;
  traj.warnings = admissibility_warnings(initial);
  if (c.mode == SchemeMode::Paper && !traj.warnings.empty()) throw ConfigError(traj.warnings.front());
  if (initial.domain.approximates_smooth_boundary()) traj.warnings.push_back("polygonal domain approximates a smooth boundary");

  const RunContext ctx(c, initial);
  traj.test_functions = ctx.family.names();
  const ReductionCaps caps = c.effective_caps();
  FlowOptions fopt;
  fopt.h_max = c.h_max;
  fopt.max_halvings = c.max_halvings;
  fopt.anchor_tolerance = c.anchor_tolerance;
  fopt.lattice_refinement = c.lattice_refinement;

  LabeledNetwork net = initial;
  auto ev = evaluate_snapshot(net, 0.0, 0, ctx.family, ctx.kernel, ctx.damping, ctx.reference, c.h_quad,
                              c.lattice_refinement);
  std::vector<DiagnosticsRecord> recent{ev.record};
  auto keep = [&](const LabeledNetwork& n, const DiagnosticsRecord& r) {
    traj.frames.push_back({r.t, r.epoch, n, r});
    if (on_frame) on_frame(traj.frames.back());
  };
  keep(net, ev.record);

  const auto epochs = static_cast<std::int64_t>(std::floor(c.t_end / c.dt + 1e-9));
  DiagnosticsRecord totals = ev.record;
  try {
    for (std::int64_t k = 1; k <= epochs; ++k) {
      const RegionIndex idx{c.j, k};
      auto red = reduce(net, idx, caps);
      for (const auto& m : red.moves) (m.accepted ? totals.moves_accepted : totals.moves_rejected)++;
      totals.excess += red.excess.achieved_reduction;
      auto ret = retract(red.network, ctx.damping.anchor(), idx, c.mode);
      totals.moves_accepted += static_cast<std::int64_t>(ret.moves.size());
      const LabeledNetwork& cur = ret.network;
      const bool unchanged = network_hash(cur) == network_hash(net);
      const FlowStepResult fs =
          unchanged ? flow_step(cur, ev.field, ctx.damping, c.dt, fopt)
                    : flow_step(cur, CurvatureField(slice(cur, c.h_quad), ctx.kernel, c.lattice_refinement),
                                ctx.damping, c.dt, fopt);
      totals.halvings += fs.halvings;
      totals.exceedances += static_cast<std::int64_t>(
          motion_bound_check(fs.displacements, c.eps, c.kappa, c.mode, c.effective_motion_cap()).exceedances);
      // Left Riemann sums of the integrands of the epoch's starting network.
      totals.cumulative_dissipation += c.dt * ev.record.dissipation_integrand;
      totals.cumulative_brakke.resize(ev.record.brakke_integrands.size(), 0.0);
      for (std::size_t q = 0; q < ev.record.brakke_integrands.size(); ++q)
        totals.cumulative_brakke[q] += c.dt * ev.record.brakke_integrands[q];

      net = fs.network;
      totals.surgeries += static_cast<std::int64_t>(repair_degenerate_faces(net, c.surgery_area).size());
      const double t = static_cast<double>(k) * c.dt;
      ev = evaluate_snapshot(net, t, k, ctx.family, ctx.kernel, ctx.damping, ctx.reference, c.h_quad,
                             c.lattice_refinement);
      auto& r = ev.record;
      r.cumulative_dissipation = totals.cumulative_dissipation;
      r.cumulative_brakke = totals.cumulative_brakke;
      r.moves_accepted = totals.moves_accepted;
      r.moves_rejected = totals.moves_rejected;
      r.surgeries = totals.surgeries;
      r.exceedances = totals.exceedances;
      r.halvings = totals.halvings;
      r.excess = totals.excess;

      recent.push_back(r);
      if (recent.size() > static_cast<std::size_t>(c.stationarity_window)) recent.erase(recent.begin());
      std::optional<double> stat;
      if (recent.size() >= 2 && recent.size() == static_cast<std::size_t>(c.stationarity_window))
        stat = detect_stationarity(recent, c.stationarity_window, c.stationarity_tol);
      if (stat && !traj.stationary_at) traj.stationary_at = stat;
      const bool stop = stat && c.stop_when_stationary;
      if (k % c.snapshot_every == 0 || k == epochs || stop) keep(net, r);
      if (stop) break;
    }
  } catch (const StepSizeError& e) {
    traj.failure = e.what();
    if (traj.frames.back().epoch != ev.record.epoch) keep(net, ev.record);
    throw RunFailure(e.what(), std::move(traj), true);
  } catch (const Error& e) {
    traj.failure = e.what();
    throw RunFailure(e.what(), std::move(traj), false);
  }
  return traj;
}

}  // namespace brakke
