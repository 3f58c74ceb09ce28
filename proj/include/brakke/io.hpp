#pragma once

// Configuration parsing, scenario library, snapshot persistence, CSV summary
// and SVG rendering.

#include "brakke/core.hpp"
#include "brakke/diagnostics.hpp"
#include "brakke/driver.hpp"
#include "brakke/partition.hpp"
#include "brakke/scenarios.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace brakke {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// JSON conversions.

namespace detail {

inline Json vec_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }

inline Vec2 json_vec(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(where + " must be a pair of numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline double json_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

inline std::int64_t json_integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer() && !(j.is_number_float() && j.get<double>() == std::floor(j.get<double>())))
    throw ConfigError(where + " must be an integer");
  return j.is_number_integer() ? j.get<std::int64_t>() : static_cast<std::int64_t>(j.get<double>());
}

inline void require_object(const Json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be a table");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
}

inline NodeKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "interior") return NodeKind::Interior;
  if (s == "junction") return NodeKind::Junction;
  if (s == "anchor") return NodeKind::Anchor;
  throw ConfigError(where + " must be one of interior, junction, anchor");
}

inline const char* kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Interior: return "interior";
    case NodeKind::Junction: return "junction";
    case NodeKind::Anchor: return "anchor";
  }
  return "interior";
}

}  // namespace detail

inline Json to_json(const ConvexDomain& d) {
  switch (d.shape()) {
    case ConvexDomain::Shape::Disk:
      return {{"type", "disk"}, {"center", detail::vec_json(d.center())}, {"radius", d.semi_axis_x()}};
    case ConvexDomain::Shape::Ellipse:
      return {{"type", "ellipse"}, {"center", detail::vec_json(d.center())}, {"a", d.semi_axis_x()}, {"b", d.semi_axis_y()}};
    case ConvexDomain::Shape::Polygon: {
      Json v = Json::array();
      for (const auto& p : d.vertices()) v.push_back(detail::vec_json(p));
      return {{"type", "polygon"}, {"vertices", v}};
    }
  }
  return {};
}

inline ConvexDomain domain_from_json(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) throw ConfigError(where + ".type is required");
  const auto type = j["type"].get<std::string>();
  try {
    if (type == "disk") {
      detail::require_object(j, where, {"type", "center", "radius"});
      return ConvexDomain::disk(detail::json_vec(j.value("center", Json::array({0.0, 0.0})), where + ".center"),
                                detail::json_number(j.at("radius"), where + ".radius"));
    }
    if (type == "ellipse") {
      detail::require_object(j, where, {"type", "center", "a", "b"});
      return ConvexDomain::ellipse(detail::json_vec(j.value("center", Json::array({0.0, 0.0})), where + ".center"),
                                   detail::json_number(j.at("a"), where + ".a"), detail::json_number(j.at("b"), where + ".b"));
    }
    if (type == "polygon") {
      detail::require_object(j, where, {"type", "vertices"});
      std::vector<Vec2> v;
      for (const auto& p : j.at("vertices")) v.push_back(detail::json_vec(p, where + ".vertices"));
      return ConvexDomain::polygon(std::move(v));
    }
  } catch (const ParameterError& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const Json::out_of_range&) {
    throw ConfigError(where + " is missing a required field");
  }
  throw ConfigError(where + ".type must be disk, ellipse or polygon");
}

inline Json to_json(const LabeledNetwork& n) {
  Json nodes = Json::array(), edges = Json::array();
  for (const auto& nd : n.nodes) nodes.push_back({{"x", nd.pos.x()}, {"y", nd.pos.y()}, {"kind", detail::kind_name(nd.kind)}});
  for (const auto& e : n.edges) {
    Json in = Json::array();
    for (const auto& p : e.interior) in.push_back(detail::vec_json(p));
    edges.push_back({{"tail", e.tail}, {"head", e.head}, {"left", e.left}, {"right", e.right}, {"interior", in}});
  }
  return {{"domain", to_json(n.domain)}, {"phases", n.phases}, {"boundary_label", n.boundary_label},
          {"nodes", nodes},         {"edges", edges}};
}

inline LabeledNetwork network_from_json(const Json& j, const std::string& where) {
  detail::require_object(j, where, {"domain", "phases", "boundary_label", "nodes", "edges"});
  LabeledNetwork n;
  if (!j.contains("domain")) throw ConfigError(where + ".domain is required");
  n.domain = domain_from_json(j["domain"], where + ".domain");
  if (!j.contains("phases")) throw ConfigError(where + ".phases is required");
  n.phases = static_cast<int>(detail::json_integer(j["phases"], where + ".phases"));
  if (j.contains("boundary_label")) n.boundary_label = static_cast<Label>(detail::json_integer(j["boundary_label"], where + ".boundary_label"));
  const Json nodes = j.value("nodes", Json::array()), edges = j.value("edges", Json::array());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string w = where + ".nodes[" + std::to_string(i) + "]";
    detail::require_object(nodes[i], w, {"x", "y", "kind"});
    if (!nodes[i].contains("x") || !nodes[i].contains("y")) throw ConfigError(w + " needs x and y");
    const NodeKind k = detail::parse_kind(nodes[i].value("kind", std::string("interior")), w + ".kind");
    n.nodes.push_back({{detail::json_number(nodes[i]["x"], w + ".x"), detail::json_number(nodes[i]["y"], w + ".y")}, k});
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string w = where + ".edges[" + std::to_string(i) + "]";
    detail::require_object(edges[i], w, {"tail", "head", "left", "right", "interior"});
    for (const char* key : {"tail", "head", "left", "right"})
      if (!edges[i].contains(key)) throw ConfigError(w + "." + key + " is required");
    Edge e;
    const auto tail = detail::json_integer(edges[i]["tail"], w + ".tail");
    const auto head = detail::json_integer(edges[i]["head"], w + ".head");
    if (tail < 0 || head < 0 || static_cast<std::size_t>(tail) >= n.nodes.size() || static_cast<std::size_t>(head) >= n.nodes.size())
      throw ConfigError(w + " refers to a missing node");
    e.tail = static_cast<std::size_t>(tail);
    e.head = static_cast<std::size_t>(head);
    e.left = static_cast<Label>(detail::json_integer(edges[i]["left"], w + ".left"));
    e.right = static_cast<Label>(detail::json_integer(edges[i]["right"], w + ".right"));
    for (const auto& p : edges[i].value("interior", Json::array())) e.interior.push_back(detail::json_vec(p, w + ".interior"));
    n.edges.push_back(std::move(e));
  }
  return n;
}

inline Json to_json(const BarrierSpec& b) {
  return {{"point", detail::vec_json(b.point)}, {"normal", detail::vec_json(b.normal)},
          {"probe_center", detail::vec_json(b.probe_center)}, {"probe_radius", b.probe_radius}};
}

inline BarrierSpec barrier_from_json(const Json& j, const std::string& where) {
  detail::require_object(j, where, {"point", "normal", "probe_center", "probe_radius"});
  BarrierSpec b;
  if (j.contains("point")) b.point = detail::json_vec(j["point"], where + ".point");
  if (j.contains("normal")) b.normal = detail::json_vec(j["normal"], where + ".normal");
  if (j.contains("probe_center")) b.probe_center = detail::json_vec(j["probe_center"], where + ".probe_center");
  if (j.contains("probe_radius")) b.probe_radius = detail::json_number(j["probe_radius"], where + ".probe_radius");
  if (!(b.normal.norm() > 0.0)) throw ConfigError(where + ".normal must be non-zero");
  return b;
}

inline Json to_json(const FlowConfig& c) {
  Json j = {{"j", c.j},
            {"eps", c.eps},
            {"dt", c.dt},
            {"kappa", c.kappa},
            {"t_end", c.t_end},
            {"mode", c.mode == SchemeMode::Paper ? "paper" : "desk"},
            {"h_max", c.h_max},
            {"h_quad", c.h_quad},
            {"caps", {{"displacement", c.caps.displacement}, {"area", c.caps.area}}},
            {"snapshot_every", c.snapshot_every},
            {"stationarity", {{"tol", c.stationarity_tol}, {"window", c.stationarity_window}, {"stop", c.stop_when_stationary}}},
            {"seed", c.seed},
            {"max_halvings", c.max_halvings},
            {"lattice_refinement", c.lattice_refinement},
            {"motion_cap", c.motion_cap},
            {"anchor_tolerance", c.anchor_tolerance},
            {"surgery_area", c.surgery_area}};
  if (c.barrier) j["barrier"] = to_json(*c.barrier);
  return j;
}

/// Applies the entries of `j` on top of `c`; unknown keys are rejected.
inline void apply_flow_json(FlowConfig& c, const Json& j, const std::string& where) {
  using namespace detail;
  require_object(j, where,
                 {"j", "eps", "dt", "kappa", "t_end", "mode", "h_max", "h_quad", "caps", "snapshot_every", "stationarity",
                  "seed", "max_halvings", "lattice_refinement", "motion_cap", "anchor_tolerance", "surgery_area", "barrier"});
  auto num = [&](const char* k, double& out) {
    if (j.contains(k)) out = json_number(j[k], where + "." + k);
  };
  auto integer = [&](const char* k, int& out) {
    if (j.contains(k)) out = static_cast<int>(json_integer(j[k], where + "." + k));
  };
  num("j", c.j);
  num("eps", c.eps);
  num("dt", c.dt);
  integer("kappa", c.kappa);
  num("t_end", c.t_end);
  if (j.contains("mode")) {
    const auto m = j["mode"].is_string() ? j["mode"].get<std::string>() : std::string();
    if (m == "paper") c.mode = SchemeMode::Paper;
    else if (m == "desk") c.mode = SchemeMode::Desk;
    else throw ConfigError(where + ".mode must be \"paper\" or \"desk\"");
  }
  num("h_max", c.h_max);
  num("h_quad", c.h_quad);
  if (j.contains("caps")) {
    require_object(j["caps"], where + ".caps", {"displacement", "area"});
    if (j["caps"].contains("displacement")) c.caps.displacement = json_number(j["caps"]["displacement"], where + ".caps.displacement");
    if (j["caps"].contains("area")) c.caps.area = json_number(j["caps"]["area"], where + ".caps.area");
  }
  integer("snapshot_every", c.snapshot_every);
  if (j.contains("stationarity")) {
    const auto& s = j["stationarity"];
    require_object(s, where + ".stationarity", {"tol", "window", "stop"});
    if (s.contains("tol")) c.stationarity_tol = json_number(s["tol"], where + ".stationarity.tol");
    if (s.contains("window")) c.stationarity_window = static_cast<int>(json_integer(s["window"], where + ".stationarity.window"));
    if (s.contains("stop")) {
      if (!s["stop"].is_boolean()) throw ConfigError(where + ".stationarity.stop must be true or false");
      c.stop_when_stationary = s["stop"].get<bool>();
    }
  }
  if (j.contains("seed")) {
    const auto s = json_integer(j["seed"], where + ".seed");
    if (s < 0) throw ConfigError(where + ".seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  integer("max_halvings", c.max_halvings);
  integer("lattice_refinement", c.lattice_refinement);
  num("motion_cap", c.motion_cap);
  num("anchor_tolerance", c.anchor_tolerance);
  num("surgery_area", c.surgery_area);
  if (j.contains("barrier")) {
    if (j["barrier"].is_null()) c.barrier.reset();
    else c.barrier = barrier_from_json(j["barrier"], where + ".barrier");
  }
}

/// Field-level checks with messages naming the field.
inline void check_flow_config(const FlowConfig& c) {
  if (!(c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(c.eps > 0.0 && c.eps < 1.0)) throw ConfigError("eps must lie in (0, 1)");
  if (!(c.j >= 1.0)) throw ConfigError("j must be at least 1");
  if (!(c.t_end >= 0.0)) throw ConfigError("t_end must be non-negative");
  if (!(c.h_max > 0.0)) throw ConfigError("h_max must be positive");
  if (!(c.h_quad > 0.0)) throw ConfigError("h_quad must be positive");
  if (c.snapshot_every < 1) throw ConfigError("snapshot_every must be at least 1");
  if (c.stationarity_window < 2) throw ConfigError("stationarity.window must be at least 2");
  if (!(c.stationarity_tol > 0.0)) throw ConfigError("stationarity.tol must be positive");
  if (c.max_halvings < 0) throw ConfigError("max_halvings must be non-negative");
  if (c.lattice_refinement < 1) throw ConfigError("lattice_refinement must be at least 1");
  if (c.kappa < 3) throw ConfigError("kappa must be at least 3");
}

// ---------------------------------------------------------------------------
// Scenarios.

struct ScenarioSpec {
  std::string name;
  std::string description;
  LabeledNetwork network;
  /// Flow parameters this scenario needs, applied before the user's config.
  Json overrides = Json::object();
  std::vector<std::string> admissibility;
};

inline std::vector<ScenarioSpec> builtin_scenarios() {
  std::vector<ScenarioSpec> out;
  for (auto& g : builtin_geometries()) {
    ScenarioSpec s{g.name, g.description, g.network, Json::object(), {}};
    if (g.name == "circle") s.overrides = {{"eps", 0.02}, {"h_max", 0.005}};
    if (g.name == "cross4") s.overrides = {{"caps", {{"displacement", 0.005}, {"area", 1e-4}}}};
    if (g.name == "half-disk")
      s.overrides = {{"barrier", to_json(BarrierSpec{{0.0, 0.0}, {0.0, 1.0}, {0.0, 0.5}, 0.3})}};
    s.admissibility = admissibility_warnings(s.network);
    out.push_back(std::move(s));
  }
  return out;
}

inline ScenarioSpec find_scenario(const std::string& name) {
  for (auto& s : builtin_scenarios())
    if (s.name == name) return s;
  std::string known;
  for (const auto& s : builtin_scenarios()) known += (known.empty() ? "" : ", ") + s.name;
  throw ConfigError("unknown scenario '" + name + "' (known: " + known + ")");
}

// ---------------------------------------------------------------------------
// Run configuration.

struct RunConfig {
  FlowConfig flow;
  ScenarioSpec scenario;
  /// The scenario as written: a built-in name or an inline table.
  Json scenario_source;
  Json flow_source = Json::object();
  std::string run_id = "run";
  std::string output = "out";
};

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.flow == b.flow && a.scenario.name == b.scenario.name && to_json(a.scenario.network) == to_json(b.scenario.network) &&
         a.run_id == b.run_id && a.output == b.output;
}

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

/// Config text is JSON with the tables "scenario" (built-in name or inline
/// network), "flow" and "run".
inline RunConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte);
    std::string msg = e.what();
    if (const auto p = msg.find("parse error"); p != std::string::npos) msg = msg.substr(p);
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
  }
  detail::require_object(j, "", {"scenario", "flow", "run"});
  if (!j.contains("scenario")) throw ConfigError("scenario is required");
  RunConfig rc;
  rc.scenario_source = j["scenario"];
  if (j["scenario"].is_string()) {
    rc.scenario = find_scenario(j["scenario"].get<std::string>());
  } else {
    const auto& s = j["scenario"];
    detail::require_object(s, "scenario", {"name", "description", "network", "overrides"});
    rc.scenario.name = s.value("name", std::string("custom"));
    rc.scenario.description = s.value("description", std::string());
    if (!s.contains("network")) throw ConfigError("scenario.network is required");
    rc.scenario.network = network_from_json(s["network"], "scenario.network");
    rc.scenario.overrides = s.value("overrides", Json::object());
    rc.scenario.admissibility = admissibility_warnings(rc.scenario.network);
  }
  apply_flow_json(rc.flow, rc.scenario.overrides, "scenario.overrides");
  if (j.contains("flow")) {
    rc.flow_source = j["flow"];
    apply_flow_json(rc.flow, j["flow"], "flow");
  }
  check_flow_config(rc.flow);
  if (j.contains("run")) {
    detail::require_object(j["run"], "run", {"id", "output"});
    if (j["run"].contains("id")) {
      if (!j["run"]["id"].is_string() || j["run"]["id"].get<std::string>().empty()) throw ConfigError("run.id must be a non-empty string");
      rc.run_id = j["run"]["id"].get<std::string>();
    }
    if (j["run"].contains("output")) {
      if (!j["run"]["output"].is_string()) throw ConfigError("run.output must be a string");
      rc.output = j["run"]["output"].get<std::string>();
    }
  }
  const auto v = validate(rc.scenario.network);
  if (!v.empty()) throw ConfigError("scenario network invalid: " + v.front().invariant + " (" + v.front().element + ")");
  return rc;
}

/// Fully explicit config text: the effective flow table and the scenario as given.
inline std::string serialize_config(const RunConfig& rc) {
  Json j;
  j["scenario"] = rc.scenario_source.is_null() ? Json(rc.scenario.name) : rc.scenario_source;
  j["flow"] = to_json(rc.flow);
  j["run"] = {{"id", rc.run_id}, {"output", rc.output}};
  return j.dump(2);
}

/// Output directory: relative paths are resolved against FLOW_OUTPUT_ROOT when set.
inline std::filesystem::path resolve_output(const std::string& dir) {
  std::filesystem::path p(dir);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv("FLOW_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / p;
  return p;
}

// ---------------------------------------------------------------------------
// Snapshots.

struct SnapshotRow {
  std::string run_id;
  FlowConfig config;
  std::vector<std::string> test_functions;
  Frame frame;
};

inline Json to_json(const DiagnosticsRecord& r) {
  return {{"t", r.t},
          {"epoch", r.epoch},
          {"length", r.length},
          {"masses", r.masses},
          {"brakke_integrands", r.brakke_integrands},
          {"dissipation_integrand", r.dissipation_integrand},
          {"max_eta_h", r.max_eta_h},
          {"max_eta_h_normal", r.max_eta_h_normal},
          {"junction_angles", r.junction_angles},
          {"phase_areas", r.phase_areas},
          {"hull_margin", r.hull_margin},
          {"boundary_drift", r.boundary_drift},
          {"probe_mass", r.probe_mass},
          {"cumulative_dissipation", r.cumulative_dissipation},
          {"cumulative_brakke", r.cumulative_brakke},
          {"moves_accepted", r.moves_accepted},
          {"moves_rejected", r.moves_rejected},
          {"surgeries", r.surgeries},
          {"exceedances", r.exceedances},
          {"halvings", r.halvings},
          {"excess", r.excess}};
}

inline DiagnosticsRecord record_from_json(const Json& j) {
  DiagnosticsRecord r;
  r.t = j.at("t").get<double>();
  r.epoch = j.at("epoch").get<std::int64_t>();
  r.length = j.at("length").get<double>();
  r.masses = j.at("masses").get<std::vector<double>>();
  r.brakke_integrands = j.at("brakke_integrands").get<std::vector<double>>();
  r.dissipation_integrand = j.at("dissipation_integrand").get<double>();
  r.max_eta_h = j.at("max_eta_h").get<double>();
  r.max_eta_h_normal = j.at("max_eta_h_normal").get<double>();
  r.junction_angles = j.at("junction_angles").get<std::vector<double>>();
  r.phase_areas = j.at("phase_areas").get<std::vector<double>>();
  r.hull_margin = j.at("hull_margin").get<double>();
  r.boundary_drift = j.at("boundary_drift").get<double>();
  r.probe_mass = j.at("probe_mass").get<double>();
  r.cumulative_dissipation = j.at("cumulative_dissipation").get<double>();
  r.cumulative_brakke = j.at("cumulative_brakke").get<std::vector<double>>();
  r.moves_accepted = j.at("moves_accepted").get<std::int64_t>();
  r.moves_rejected = j.at("moves_rejected").get<std::int64_t>();
  r.surgeries = j.at("surgeries").get<std::int64_t>();
  r.exceedances = j.at("exceedances").get<std::int64_t>();
  r.halvings = j.at("halvings").get<std::int64_t>();
  r.excess = j.at("excess").get<double>();
  return r;
}

/// One line of the snapshot stream. Doubles are printed in shortest
/// round-trip form, so parsing restores every bit.
inline std::string snapshot_line(const SnapshotRow& row) {
  const Json j = {{"run", row.run_id},
                  {"config", to_json(row.config)},
                  {"test_functions", row.test_functions},
                  {"t", row.frame.t},
                  {"epoch", row.frame.epoch},
                  {"network", to_json(row.frame.network)},
                  {"record", to_json(row.frame.record)}};
  return j.dump();
}

inline SnapshotRow parse_snapshot_line(const std::string& line) {
  const Json j = Json::parse(line);
  SnapshotRow row;
  row.run_id = j.at("run").get<std::string>();
  apply_flow_json(row.config, j.at("config"), "config");
  row.test_functions = j.at("test_functions").get<std::vector<std::string>>();
  row.frame.t = j.at("t").get<double>();
  row.frame.epoch = j.at("epoch").get<std::int64_t>();
  row.frame.network = network_from_json(j.at("network"), "network");
  row.frame.record = record_from_json(j.at("record"));
  return row;
}

class SnapshotWriter {
 public:
  explicit SnapshotWriter(const std::filesystem::path& path) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  }
  void write(const SnapshotRow& row) {
    out_ << snapshot_line(row) << '\n';
    if (!out_) throw IoError("write failed on " + path_.string());
  }
  void flush() { out_.flush(); }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Reads every row; format errors name the 1-based row index.
inline std::vector<SnapshotRow> read_snapshots(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<SnapshotRow> rows;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    ++index;
    if (line.empty()) continue;
    try {
      rows.push_back(parse_snapshot_line(line));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ": row " + std::to_string(index) + ": " + e.what());
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Summary table.

struct SummaryRow {
  std::string run_id;
  std::string scenario;
  std::int64_t epochs = 0;
  double t_final = 0.0;
  double length_initial = 0.0;
  double length_final = 0.0;
  double dissipation = 0.0;
  double max_drift = 0.0;
  double min_hull_margin = 0.0;
  std::optional<double> stationary_at;
  std::string status;
};

inline SummaryRow summarize(const std::string& run_id, const std::string& scenario, const Trajectory& tr) {
  SummaryRow s;
  s.run_id = run_id;
  s.scenario = scenario;
  if (!tr.frames.empty()) {
    const auto& a = tr.frames.front().record;
    const auto& b = tr.frames.back().record;
    s.epochs = b.epoch;
    s.t_final = b.t;
    s.length_initial = a.length;
    s.length_final = b.length;
    s.dissipation = b.cumulative_dissipation;
    s.min_hull_margin = std::numeric_limits<double>::infinity();
    for (const auto& f : tr.frames) {
      s.max_drift = std::max(s.max_drift, f.record.boundary_drift);
      s.min_hull_margin = std::min(s.min_hull_margin, f.record.hull_margin);
    }
  }
  s.stationary_at = tr.stationary_at;
  s.status = tr.failure.empty() ? "ok" : "failed";
  return s;
}

inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Appends one row per run; the header is written when the file is new.
inline void append_summary_csv(const std::filesystem::path& path, const SummaryRow& s) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot open " + path.string());
  if (fresh)
    out << "run_id,scenario,epochs,t_final,length_initial,length_final,dissipation,max_drift,min_hull_margin,stationary_at,status\n";
  out << s.run_id << ',' << s.scenario << ',' << s.epochs << ',' << csv_number(s.t_final) << ','
      << csv_number(s.length_initial) << ',' << csv_number(s.length_final) << ',' << csv_number(s.dissipation) << ','
      << csv_number(s.max_drift) << ',' << csv_number(s.min_hull_margin) << ','
      << (s.stationary_at ? csv_number(*s.stationary_at) : std::string()) << ',' << s.status << '\n';
  if (!out) throw IoError("write failed on " + path.string());
}

// ---------------------------------------------------------------------------
// SVG.

struct SvgStyle {
  int size = 600;
  double stroke = 2.0;
  double anchor_radius = 4.0;
};

namespace detail {

inline const char* phase_color(Label l) {
  static const char* palette[] = {"#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3",
                                  "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd"};
  return palette[static_cast<std::size_t>(l - 1) % 10];
}

struct Piece {
  std::size_t from, to;  // node ids; equal for closed pieces
  std::vector<Vec2> points;
  bool closed;
};

// Oriented boundary pieces of phase `l` (the phase on the left of each).
inline std::vector<Piece> phase_pieces(const LabeledNetwork& net, Label l, const std::vector<BoundaryArc>& arcs) {
  std::vector<Piece> out;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto& ed = net.edges[e];
    const bool closed = ed.tail == ed.head;
    if (ed.left == l) out.push_back({ed.tail, ed.head, net.polyline(e), closed});
    if (ed.right == l) {
      auto p = net.polyline(e);
      std::reverse(p.begin(), p.end());
      out.push_back({ed.head, ed.tail, p, closed});
    }
  }
  if (arcs.empty()) {
    if (net.boundary_label == l) {
      const auto p = net.domain.boundary_arc(0.0, net.domain.parameter_period(), 256);
      out.push_back({0, 0, p, true});
    }
  } else {
    for (const auto& a : arcs)
      if (a.label == l) {
        auto p = net.domain.boundary_arc(a.s0, a.s1, 128);
        p.front() = net.nodes[a.from_anchor].pos;
        p.back() = net.nodes[a.to_anchor].pos;
        out.push_back({a.from_anchor, a.to_anchor, p, a.from_anchor == a.to_anchor && arcs.size() == 1});
      }
  }
  return out;
}

}  // namespace detail

/// Phases as filled regions, the network as strokes, anchors as dots.
inline std::string render_svg(const LabeledNetwork& net, const SvgStyle& style = {}) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (int i = 0; i < 512; ++i) {
    const Vec2 q = net.domain.boundary_point(net.domain.parameter_period() * i / 512.0);
    xmin = std::min(xmin, q.x()), xmax = std::max(xmax, q.x());
    ymin = std::min(ymin, q.y()), ymax = std::max(ymax, q.y());
  }
  const double pad = 0.05 * std::max(xmax - xmin, ymax - ymin);
  xmin -= pad, xmax += pad, ymin -= pad, ymax += pad;
  const double scale = style.size / std::max(xmax - xmin, ymax - ymin);
  auto X = [&](const Vec2& p) { return (p.x() - xmin) * scale; };
  auto Y = [&](const Vec2& p) { return (ymax - p.y()) * scale; };
  char buf[128];
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.size << "\" height=\"" << style.size
    << "\" viewBox=\"0 0 " << style.size << ' ' << style.size << "\">\n";
  const auto arcs = boundary_arcs(net);
  for (Label l = 1; l <= net.phases; ++l) {
    // Chain the oriented pieces into closed loops; with the nonzero rule the
    // union fills exactly the phase.
    auto pieces = detail::phase_pieces(net, l, arcs);
    if (pieces.empty()) continue;
    std::string d;
    std::vector<bool> used(pieces.size(), false);
    for (std::size_t start = 0; start < pieces.size(); ++start) {
      if (used[start]) continue;
      std::size_t cur = start;
      bool first = true;
      while (true) {
        used[cur] = true;
        const auto& pts = pieces[cur].points;
        for (std::size_t i = first ? 0 : 1; i < pts.size(); ++i) {
          std::snprintf(buf, sizeof buf, "%s%.3f %.3f ", (first && i == 0) ? "M" : "L", X(pts[i]), Y(pts[i]));
          d += buf;
        }
        first = false;
        if (pieces[cur].closed) break;
        std::optional<std::size_t> next;
        for (std::size_t k = 0; k < pieces.size(); ++k)
          if (!used[k] && !pieces[k].closed && pieces[k].from == pieces[cur].to) {
            next = k;
            break;
          }
        if (!next) break;
        cur = *next;
      }
      d += "Z ";
    }
    s << "<path fill=\"" << detail::phase_color(l) << "\" fill-rule=\"nonzero\" stroke=\"none\" d=\"" << d << "\"/>\n";
  }
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    s << "<polyline fill=\"none\" stroke=\"#222222\" stroke-width=\"" << style.stroke << "\" points=\"";
    for (const auto& p : net.polyline(e)) {
      std::snprintf(buf, sizeof buf, "%.3f,%.3f ", X(p), Y(p));
      s << buf;
    }
    s << "\"/>\n";
  }
  for (auto a : net.anchors()) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.1f\" fill=\"#000000\"/>\n", X(net.nodes[a].pos),
                  Y(net.nodes[a].pos), style.anchor_radius);
    s << buf;
  }
  s << "</svg>\n";
  return s.str();
}

/// One SVG per snapshot, named frame_00000.svg, frame_00001.svg, ...
inline std::vector<std::filesystem::path> render_trajectory(const std::vector<SnapshotRow>& rows,
                                                            const std::filesystem::path& dir, const SvgStyle& style = {}) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> files;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.svg", i);
    const auto path = dir / name;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << render_svg(rows[i].frame.network, style);
    files.push_back(path);
  }
  return files;
}

}  // namespace brakke
