// Command-line driver: run, scenario, sweep, convergence, classify.
//
// Exit codes: 0 success, 1 failed check or aborted run, 2 usage or config error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>

#include "nsch/config.hpp"
#include "nsch/errors.hpp"
#include "nsch/output.hpp"
#include "nsch/parallel.hpp"
#include "nsch/potential.hpp"
#include "nsch/scenarios.hpp"

namespace fs = std::filesystem;
using namespace nsch;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

int workers_from_env() {
  const char* v = std::getenv("NSCH_WORKERS");
  if (!v || !*v) return 1;
  try {
    const double n = parse_double(v);
    if (n >= 1.0) return static_cast<int>(n);
  } catch (const std::invalid_argument&) {
  }
  throw ConfigError(std::string("NSCH_WORKERS must be a positive integer, got '") + v + "'");
}

std::string snapshot_name(double t) { return "snapshot_t" + format_double(t) + ".csv"; }

struct RunOutcome {
  bool ok = true;
  std::string message;
};

// One simulation into its own directory: config.echo, timeseries.csv, snapshots.
RunOutcome run_one(const RunConfig& cfg) {
  const fs::path dir = cfg.directory;
  fs::create_directories(dir);
  {
    std::ofstream echo(dir / "config.echo", std::ios::binary);
    echo << echo_config(cfg);
    if (!echo) throw std::runtime_error("write failed: " + (dir / "config.echo").string());
  }
  const Grid grid = cfg.grid();
  const State s0 = make_initial(grid, cfg.initial.build());
  Recorder recorder(cfg.params, grid);
  std::vector<Sink> sinks{recorder.sink()};

  RunOptions options;
  options.t_end = cfg.t_end;
  options.record_every = cfg.record_every;
  bool final_snapshot = false;
  for (double t : cfg.snapshot_times) {
    if (t == s0.time) write_snapshot(s0, cfg.params, grid, (dir / snapshot_name(t)).string());
    else if (t == cfg.t_end) final_snapshot = true;
    else options.stop_times.push_back(t);
  }
  options.on_stop = [&](const State& s) {
    write_snapshot(s, cfg.params, grid, (dir / snapshot_name(s.time)).string());
  };

  RunOutcome outcome;
  try {
    const RunSummary summary = run(s0, cfg.params, grid, cfg.controls, options, sinks);
    if (final_snapshot) {
      write_snapshot(summary.final_state, cfg.params, grid, (dir / snapshot_name(cfg.t_end)).string());
    }
    outcome.message = cfg.directory + ": " + std::to_string(summary.steps) + " steps, " +
                      std::to_string(summary.retries) + " retries";
  } catch (const RunAborted& e) {
    const fs::path post = dir / "postmortem.csv";
    write_snapshot(e.snapshot(), cfg.params, grid, post.string());
    outcome.ok = false;
    outcome.message = cfg.directory + ": aborted: " + e.what() + "; snapshot " + post.string();
  }
  write_timeseries(recorder.records(), (dir / "timeseries.csv").string());
  return outcome;
}

int print_report(const ScenarioReport& report) {
  std::cout << report.summary();
  std::cout << report.name << (report.passed() ? " PASS" : " FAIL") << '\n';
  return report.passed() ? kOk : kFailed;
}

int cmd_run(const std::string& path) {
  const RunConfig cfg = load_config(path);
  const RunOutcome outcome = run_one(cfg);
  (outcome.ok ? std::cout : std::cerr) << outcome.message << '\n';
  return outcome.ok ? kOk : kFailed;
}

int cmd_scenario(const std::string& name, const std::string& out_dir, int workers) {
  if (const auto sc = find_scenario(name)) {
    // Single-trajectory scenarios also leave their time series behind.
    const Trajectory tr = simulate(*sc);
    const ScenarioReport report = sc->name == "spinodal"
                                      ? evaluate_spinodal(*sc, tr)
                                      : evaluate_stable(*sc, tr, sc->bc == Boundary::Mixed);
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      write_timeseries(tr.records, (fs::path(out_dir) / "timeseries.csv").string());
      std::ofstream summary(fs::path(out_dir) / "summary.txt", std::ios::binary);
      summary << report.summary();
    }
    if (tr.aborted) std::cerr << "run aborted: " << tr.abort_reason << '\n';
    return print_report(report);
  }
  const auto report = run_named(name, workers);
  if (!report) {
    std::cerr << "unknown scenario '" << name << "'; known:";
    for (const auto& n : scenario_names()) std::cerr << ' ' << n;
    std::cerr << '\n';
    return kUsage;
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream summary(fs::path(out_dir) / "summary.txt", std::ios::binary);
    summary << report->summary();
  }
  return print_report(*report);
}

int cmd_sweep(const std::string& path, int workers) {
  const RunConfig base = load_config(path);
  if (base.sweep_key.empty() || base.sweep_values.empty()) {
    throw ConfigError("sweep needs mode.sweep_key and mode.sweep_values");
  }
  std::vector<RunConfig> runs;
  for (double v : base.sweep_values) {
    RunConfig cfg = base;
    const std::string value = format_double(v);
    set_config_value(cfg, base.sweep_key, value);
    cfg.directory = (fs::path(base.directory) / (base.sweep_key + "=" + value)).string();
    runs.push_back(std::move(cfg));
  }
  std::vector<RunOutcome> outcomes(runs.size());
  parallel_for(runs.size(), workers, [&](std::size_t i) { outcomes[i] = run_one(runs[i]); });
  bool ok = true;
  for (const auto& o : outcomes) {
    (o.ok ? std::cout : std::cerr) << o.message << '\n';
    ok = ok && o.ok;
  }
  return ok ? kOk : kFailed;
}

int cmd_convergence(const std::string& path, const std::string& bc, int workers) {
  ConvergenceLadder ladder = scenario_convergence(bc == "mixed" ? Boundary::Mixed : Boundary::Periodic);
  if (!path.empty()) {
    const RunConfig cfg = load_config(path);
    ladder.base.params = cfg.params;
    ladder.base.controls.step = cfg.controls.step;
    ladder.base.bc = cfg.bc;
    ladder.base.length = cfg.length;
    if (cfg.initial.kind != InitialKind::Constant || !cfg.initial.modes.empty()) {
      ladder.base.initial = cfg.initial.build();
    }
    ladder.base.t_end = cfg.t_end;
  }
  const ConvergenceResult result = run_convergence(ladder, workers);
  for (std::size_t i = 0; i < result.errors.size(); ++i) {
    std::cout << "N=" << result.levels[i] << " error=" << format_double(result.errors[i]);
    if (i > 0) std::cout << " order=" << format_double(result.orders[i - 1]);
    std::cout << '\n';
  }
  return print_report(result.report);
}

int cmd_classify(double chi_bar, double tol) {
  std::cout << to_string(classify_mean(chi_bar, tol)) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1-D compressible Navier-Stokes-Cahn-Hilliard simulator"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run one simulation");
  run_cmd->add_option("--config", config_path, "Configuration file")->required();

  std::string scenario_name, out_dir;
  auto* scenario_cmd = app.add_subcommand("scenario", "Run a canned experiment");
  scenario_cmd->add_option("name", scenario_name, "Scenario name")->required();
  scenario_cmd->add_option("--out", out_dir, "Directory for the time series and summary");

  auto* sweep_cmd = app.add_subcommand("sweep", "Fan a run out over mode.sweep_values");
  sweep_cmd->add_option("--config", config_path, "Configuration file")->required();

  std::string bc = "periodic";
  auto* conv_cmd = app.add_subcommand("convergence", "Self-convergence ladder");
  conv_cmd->add_option("--config", config_path, "Optional configuration overriding the ladder base");
  conv_cmd->add_option("--bc", bc, "periodic or mixed")->check(CLI::IsMember({"periodic", "mixed"}));

  double chi_bar = 0.0;
  double tol = kClassifyTolerance;
  auto* classify_cmd = app.add_subcommand("classify", "Classify a mean concentration");
  classify_cmd->add_option("chi_bar", chi_bar, "Mean concentration")->required();
  classify_cmd->add_option("--tol", tol, "Boundary tolerance on 3 chi^2 - 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    const int workers = workers_from_env();
    if (*run_cmd) return cmd_run(config_path);
    if (*scenario_cmd) return cmd_scenario(scenario_name, out_dir, workers);
    if (*sweep_cmd) return cmd_sweep(config_path, workers);
    if (*conv_cmd) return cmd_convergence(config_path, bc, workers);
    if (*classify_cmd) return cmd_classify(chi_bar, tol);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}
