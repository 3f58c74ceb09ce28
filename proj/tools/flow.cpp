// Command-line front end: run, diag, render, scenarios.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 IO error.

#include "brakke/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace brakke;

constexpr int kOk = 0, kConfig = 2, kNumeric = 3, kIo = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_run(const std::string& config_path, const std::string& out_dir, const std::string& mode,
            std::optional<std::uint64_t> seed, int verbosity) {
  RunConfig rc = parse_config(read_file(config_path));
  if (!mode.empty()) rc.flow.mode = mode == "paper" ? SchemeMode::Paper : SchemeMode::Desk;
  if (seed) rc.flow.seed = *seed;
  if (!out_dir.empty()) rc.output = out_dir;

  const auto report = validate_params(rc.flow);
  if (verbosity > 0) {
    for (const auto& c : report.conditions)
      std::cerr << (c.holds ? "holds  " : "fails  ") << c.name << " (log margin " << c.log_margin << ")\n";
    for (const auto& n : report.notes) std::cerr << "note   " << n << '\n';
  }
  for (const auto& w : rc.scenario.admissibility) std::cerr << "warning: " << w << '\n';

  const auto root = resolve_output(rc.output);
  const auto dir = root / rc.run_id;
  std::filesystem::create_directories(dir);
  {
    std::ofstream cfg(dir / "config.json");
    if (!cfg) throw IoError("cannot write " + (dir / "config.json").string());
    cfg << serialize_config(rc) << '\n';
  }
  SnapshotWriter writer(dir / "snapshots.jsonl");
  std::vector<std::string> names;
  auto on_frame = [&](const Frame& f) {
    if (names.empty()) names = TestFunctionFamily::standard(rc.scenario.network.domain, rc.flow.j, rc.flow.barrier).names();
    writer.write({rc.run_id, rc.flow, names, f});
    if (verbosity > 0)
      std::cerr << "t=" << f.t << " epoch=" << f.epoch << " length=" << f.record.length << " max|eta h|=" << f.record.max_eta_h
                << '\n';
  };

  Trajectory traj;
  int code = kOk;
  try {
    traj = run(rc.flow, rc.scenario.network, on_frame);
  } catch (const RunFailure& e) {
    traj = e.partial;
    std::cerr << "error: " << e.what() << '\n';
    code = kNumeric;
  }
  writer.flush();
  for (const auto& w : traj.warnings) std::cerr << "warning: " << w << '\n';
  append_summary_csv(root / "summary.csv", summarize(rc.run_id, rc.scenario.name, traj));
  const auto& last = traj.frames.back().record;
  std::cout << rc.run_id << ": " << rc.scenario.name << " t=" << last.t << " length " << traj.frames.front().record.length
            << " -> " << last.length;
  if (traj.stationary_at) std::cout << " stationary at t=" << *traj.stationary_at;
  std::cout << "\n" << (dir / "snapshots.jsonl").string() << '\n';
  return code;
}

int cmd_diag(const std::string& path, const std::string& phi, double t1, double t2) {
  const auto rows = read_snapshots(path);
  if (rows.empty()) throw IoError(path + ": no snapshots");
  const FlowConfig& c = rows.front().config;
  const auto family = TestFunctionFamily::standard(rows.front().frame.network.domain, c.j, c.barrier);
  std::vector<DiagnosticsRecord> recs;
  for (const auto& r : rows) recs.push_back(r.frame.record);
  const ResidualInputs in{c.eps, c.h_quad, c.h_max};
  const auto r = brakke_residual(recs, family, phi, t1, t2, c.j, in);
  std::printf("phi=%s t1=%.17g t2=%.17g\n", phi.c_str(), t1, t2);
  std::printf("residual=%.17g slack=%.17g dissipation=%.17g %s\n", r.residual, r.slack, r.dissipation,
              r.residual <= r.slack ? "within" : "exceeds");
  return kOk;
}

int cmd_render(const std::string& path, const std::string& out_dir) {
  const auto rows = read_snapshots(path);
  const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(path).parent_path() / "frames" : resolve_output(out_dir);
  const auto files = render_trajectory(rows, dir);
  std::cout << files.size() << " frames in " << dir.string() << '\n';
  return kOk;
}

int cmd_scenarios() {
  for (const auto& s : builtin_scenarios()) {
    std::cout << s.name << "  phases=" << s.network.phases << " anchors=" << s.network.anchors().size() << "  "
              << s.description << '\n';
    for (const auto& w : s.admissibility) std::cout << "    warning: " << w << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiphase curve-network flow: reduce, retract and smoothed-curvature steps"};
  app.require_subcommand(1);
  app.fallthrough();
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "More log output (repeatable)");

  std::string config, out_dir, mode;
  std::optional<std::uint64_t> seed;
  auto* run_cmd = app.add_subcommand("run", "Run a configured flow");
  run_cmd->add_option("config", config, "Config file")->required();
  run_cmd->add_option("-o,--output", out_dir, "Output directory");
  run_cmd->add_option("--mode", mode, "Scheme mode override")->check(CLI::IsMember({"desk", "paper"}));
  run_cmd->add_option("--seed", seed, "Seed override");

  std::string traj, phi;
  double t1 = 0.0, t2 = 0.0;
  auto* diag_cmd = app.add_subcommand("diag", "Brakke residual between two snapshot times");
  diag_cmd->add_option("trajectory", traj, "Snapshot file")->required();
  diag_cmd->add_option("--phi", phi, "Test function name")->required();
  diag_cmd->add_option("--t1", t1, "Start time")->required();
  diag_cmd->add_option("--t2", t2, "End time")->required();

  std::string render_traj, render_out;
  auto* render_cmd = app.add_subcommand("render", "Render snapshots to SVG frames");
  render_cmd->add_option("trajectory", render_traj, "Snapshot file")->required();
  render_cmd->add_option("-o,--output", render_out, "Frame directory");

  auto* list_cmd = app.add_subcommand("scenarios", "List built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run_cmd) return cmd_run(config, out_dir, mode, seed, verbosity);
    if (*diag_cmd) return cmd_diag(traj, phi, t1, t2);
    if (*render_cmd) return cmd_render(render_traj, render_out);
    if (*list_cmd) return cmd_scenarios();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const StructuralError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  }
  return kOk;
}
