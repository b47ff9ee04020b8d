#include "nsch/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nsch/errors.hpp"
#include "nsch/parallel.hpp"
#include "nsch/potential.hpp"

namespace nsch {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kConservationTol = 1e-12;
constexpr double kEnergySlack = 1e-10;
constexpr double kDecayFactor = 1e-3;
// sup|chi - chi_bar| below this is rounding, not dynamics.
constexpr double kChiFloor = 1e-11;

double relative_drift(double now, double then, double scale) {
  return std::abs(now - then) / scale;
}

std::string format_number(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

// Least-squares slope of log(value) against time over every sample.
double log_slope(const std::vector<std::pair<double, double>>& series) {
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (const auto& [t, v] : series) {
    const double y = std::log(v);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double m = static_cast<double>(series.size());
  return (m * sty - st * sy) / (m * stt - st * st);
}

Check horizon_check(std::string name, double measured, std::string relation, double threshold,
                    bool advanced) {
  Check c = make_check(std::move(name), measured, std::move(relation), threshold);
  if (!advanced && c.status == CheckStatus::Fail) c.status = CheckStatus::InsufficientHorizon;
  return c;
}

void add_conservation(ScenarioReport& report, const Trajectory& tr, bool momentum) {
  const auto& first = tr.records.front();
  const auto& last = tr.records.back();
  report.checks.push_back(make_check("mass_drift",
                                     relative_drift(last.mass, first.mass, std::abs(first.mass)),
                                     "<=", kConservationTol));
  report.checks.push_back(make_check(
      "chi_mass_drift",
      relative_drift(last.chi_mass, first.chi_mass, std::max(std::abs(first.chi_mass), first.mass)),
      "<=", kConservationTol));
  if (momentum) {
    report.checks.push_back(make_check(
        "momentum_drift",
        relative_drift(last.momentum, first.momentum, std::max(std::abs(first.momentum), first.mass)),
        "<=", kConservationTol));
  }
}

void add_kanel(ScenarioReport& report, const Scenario& sc, const Trajectory& tr) {
  double psi = 0.0, rho_lo = std::numeric_limits<double>::infinity(), rho_hi = 0.0;
  for (const auto& r : tr.records) {
    psi = std::max({psi, std::abs(r.psi_min), std::abs(r.psi_max)});
    rho_lo = std::min(rho_lo, r.rho_min);
    rho_hi = std::max(rho_hi, r.rho_max);
  }
  report.checks.push_back(make_check("psi_max_abs", psi, "<=", sc.psi_bound));
  report.checks.push_back(make_check("rho_min", rho_lo, ">=", sc.controls.step.rho_floor));
  const auto& p = sc.params;
  const double rho_bar = tr.averages.rho_bar;
  report.checks.push_back(make_check(
      "rho_min_in_psi_bracket", rho_lo, ">=", kanel_psi_inverse(-sc.psi_bound, rho_bar, p.a, p.gamma)));
  report.checks.push_back(make_check(
      "rho_max_in_psi_bracket", rho_hi, "<=", kanel_psi_inverse(sc.psi_bound, rho_bar, p.a, p.gamma)));
}

Scenario stable_template(double chi_bar, Boundary bc) {
  Scenario sc;
  sc.bc = bc;
  sc.length = 1.0;
  sc.cells = 256;
  // Lowest admissible mode: 2 pi / L periodic, pi / L between walls.
  const int wave = 1;
  const double k = (bc == Boundary::Periodic ? 2.0 : 1.0) * kPi / sc.length;
  sc.initial = PerturbedIC{{1.0, 0.0, chi_bar},
                           {{FieldId::Rho, wave, 0.5, 0.0},
                            {FieldId::U, wave, 1.0, -kPi / 2.0},
                            {FieldId::Chi, wave, 0.01, 0.0}}};
  sc.controls.dt_max = 2e-3;
  const double rate = slowest_decay_rate(sc.params, 1.0, chi_bar, k);
  sc.t_end = 10.0 / rate;
  sc.record_every = 1;
  sc.psi_bound = 0.25;
  return sc;
}

}  // namespace

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::InsufficientHorizon: return "INSUFFICIENT_HORIZON";
  }
  return "?";
}

Check make_check(std::string name, double measured, std::string relation, double threshold) {
  bool ok = false;
  if (relation == "<=") ok = measured <= threshold;
  else if (relation == ">=") ok = measured >= threshold;
  else if (relation == "<") ok = measured < threshold;
  else if (relation == ">") ok = measured > threshold;
  else if (relation == "==") ok = measured == threshold;
  else throw std::invalid_argument("make_check: unknown relation " + relation);
  return {std::move(name), measured, threshold, std::move(relation),
          ok ? CheckStatus::Pass : CheckStatus::Fail};
}

bool ScenarioReport::passed() const {
  return std::ranges::none_of(checks, [](const Check& c) { return c.status == CheckStatus::Fail; });
}

std::string ScenarioReport::summary() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << name << '.' << c.name << ' ' << format_number(c.measured) << ' ' << c.relation << ' '
        << format_number(c.threshold) << ' ' << to_string(c.status) << '\n';
  }
  return out.str();
}

Trajectory simulate(const Scenario& sc, std::span<const Sink> extra_sinks) {
  sc.params.validate();
  sc.controls.validate();
  const Grid grid = sc.grid();
  Trajectory tr;
  tr.initial_state = make_initial(grid, sc.initial);
  tr.averages = asymptotic_state(tr.initial_state, grid);

  Recorder recorder(sc.params, grid);
  std::vector<Sink> sinks{recorder.sink()};
  sinks.insert(sinks.end(), extra_sinks.begin(), extra_sinks.end());
  RunOptions options;
  options.t_end = sc.t_end;
  options.record_every = sc.record_every;
  try {
    tr.summary = run(tr.initial_state, sc.params, grid, sc.controls, options, sinks);
    tr.final_state = tr.summary.final_state;
  } catch (const RunAborted& e) {
    tr.aborted = true;
    tr.abort_reason = e.what();
    tr.final_state = e.snapshot();
  }
  tr.records = recorder.records();
  if (tr.records.empty()) {
    tr.records.push_back(record(tr.initial_state, sc.params, grid, tr.averages, 0));
  }
  return tr;
}

double slowest_decay_rate(const Params& p, double rho_bar, double chi_bar, double k) {
  const double diffusive = -dispersion_growth_rate(p, rho_bar, chi_bar, k);
  // Linearized isentropic NS: s^2 + (nu k^2 / rho_bar) s + c^2 k^2 = 0.
  const double b = p.nu * k * k / rho_bar;
  const double c = p.sound_speed(rho_bar);
  const double disc = b * b - 4.0 * c * c * k * k;
  const double acoustic = disc > 0.0 ? 0.5 * (b - std::sqrt(disc)) : 0.5 * b;
  return std::min(diffusive, acoustic);
}

Scenario scenario_stable_decay(double chi_bar) {
  Scenario sc = stable_template(chi_bar, Boundary::Periodic);
  sc.name = "stable_decay";
  return sc;
}

Scenario scenario_mixed_stability(double chi_bar) {
  Scenario sc = stable_template(chi_bar, Boundary::Mixed);
  sc.name = "mixed_stability";
  return sc;
}

Scenario scenario_spinodal(double lambda, std::uint64_t seed) {
  Scenario sc;
  sc.name = "spinodal";
  sc.length = 1.0;
  sc.cells = 256;
  sc.params.lambda = lambda;
  constexpr double amplitude = 1e-4;
  sc.initial = NoiseIC{{1.0, 0.0, 0.0}, amplitude, seed};
  sc.controls.dt_max = 1e-4;
  // Fastest continuous rate: k*^2 = (1 - 3 chi_bar^2) rho_bar / (2 eps^2).
  const double eps = sc.params.epsilon;
  const double k_star = std::sqrt(1.0 / (2.0 * eps * eps));
  const double sigma = dispersion_growth_rate(sc.params, 1.0, 0.0, k_star);
  sc.t_end = (std::log(1.0 / amplitude) + 8.0) / sigma;
  sc.record_every = 1;
  sc.psi_bound = 0.05;
  return sc;
}

LambdaSweep scenario_lambda_sweep() {
  LambdaSweep sw;
  sw.base = scenario_spinodal();
  sw.base.name = "lambda_sweep";
  return sw;
}

ConvergenceLadder scenario_convergence(Boundary bc) {
  ConvergenceLadder ladder;
  Scenario& sc = ladder.base;
  sc.name = bc == Boundary::Periodic ? "convergence" : "convergence_mixed";
  sc.bc = bc;
  sc.length = 1.0;
  const int wave = 1;
  sc.initial = PerturbedIC{{1.0, 0.0, 0.8},
                           {{FieldId::Rho, wave, 0.01, 0.0},
                            {FieldId::U, wave, 0.01, -kPi / 2.0},
                            {FieldId::Chi, wave, 0.01, 0.0}}};
  sc.t_end = 0.05;
  sc.record_every = 1 << 30;
  sc.psi_bound = 0.01;
  return ladder;
}

ScenarioReport evaluate_stable(const Scenario& sc, const Trajectory& tr, bool walls) {
  ScenarioReport report{sc.name, {}};
  report.checks.push_back(make_check("run_completed", tr.aborted ? 0.0 : 1.0, "==", 1.0));
  const auto& first = tr.records.front();
  const auto& last = tr.records.back();
  const bool advanced = last.time > first.time;

  const double sup0[] = {first.sup_rho, first.sup_u, first.sup_chi};
  const double supT[] = {last.sup_rho, last.sup_u, last.sup_chi};
  const char* names[] = {"sup_rho_ratio", "sup_u_ratio", "sup_chi_ratio"};
  for (int i = 0; i < 3; ++i) {
    const double ratio = sup0[i] > 0.0 ? supT[i] / sup0[i] : 0.0;
    report.checks.push_back(horizon_check(names[i], ratio, "<=", kDecayFactor, advanced));
  }

  double increase = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < tr.records.size(); ++i) {
    increase = std::max(increase, tr.records[i].energy - tr.records[i - 1].energy);
  }
  if (tr.records.size() < 2) increase = 0.0;
  report.checks.push_back(make_check("energy_max_increase", increase, "<=", kEnergySlack));

  std::vector<std::pair<double, double>> series;
  for (const auto& r : tr.records) {
    if (r.sup_chi > kChiFloor) series.emplace_back(r.time, r.sup_chi);
  }
  double rate = std::numeric_limits<double>::quiet_NaN();
  try {
    rate = decay_rate(series);
  } catch (const std::invalid_argument&) {
  }
  report.checks.push_back(horizon_check("sup_chi_decay_rate", rate, "<", 0.0,
                                        advanced && series.size() >= 5));

  add_conservation(report, tr, !walls);
  add_kanel(report, sc, tr);
  if (walls) {
    // Wall velocity under the odd closure is the mean of u_0 and its ghost.
    const Grid grid = sc.grid();
    const auto& u = tr.final_state.u;
    const double wall_u = std::max(std::abs(0.5 * (u.front() + grid.ghost(u, -1, FieldKind::DirichletZero))),
                                   std::abs(0.5 * (u.back() + grid.ghost(u, grid.cells(), FieldKind::DirichletZero))));
    report.checks.push_back(make_check("wall_velocity", wall_u, "<=", 1e-12));
    // One-sided second-order slope at each wall from the three nearest centers.
    const auto& chi = tr.final_state.chi;
    const double h = grid.spacing();
    const int n = grid.cells();
    const double slope0 = (-8.0 * chi[0] + 9.0 * chi[1] - chi[2]) / (3.0 * h);
    const double slopeL = (8.0 * chi[n - 1] - 9.0 * chi[n - 2] + chi[n - 3]) / (3.0 * h);
    double chi_sup = 0.0;
    for (double v : chi) chi_sup = std::max(chi_sup, std::abs(v));
    report.checks.push_back(make_check("wall_chi_slope", std::max(std::abs(slope0), std::abs(slopeL)),
                                       "<=", h * h * chi_sup));
  }
  return report;
}

ScenarioReport evaluate_spinodal(const Scenario& sc, const Trajectory& tr) {
  ScenarioReport report{sc.name, {}};
  report.checks.push_back(make_check("run_completed", tr.aborted ? 0.0 : 1.0, "==", 1.0));
  const auto& last = tr.records.back();
  const bool advanced = last.time > tr.records.front().time;
  report.checks.push_back(horizon_check("chi_max_final", last.chi_max, ">=", 0.8, advanced));
  report.checks.push_back(horizon_check("chi_min_final", last.chi_min, "<=", -0.8, advanced));
  report.checks.push_back(horizon_check("bimodal_final", chi_bimodal(tr.final_state.chi) ? 1.0 : 0.0,
                                        "==", 1.0, advanced));

  // Linear regime: after the slowest decaying resolved mode has lost 10
  // e-folds and before the amplitude reaches 1% of the wells.
  const double k1 = 2.0 * kPi / sc.length;
  const int modes = sc.cells / 2;
  double fastest = -std::numeric_limits<double>::infinity();
  double slowest_decay = std::numeric_limits<double>::infinity();
  const double chi_bar = tr.averages.chi_bar;
  const double rho_bar = tr.averages.rho_bar;
  for (int n = 1; n <= modes; ++n) {
    const double sigma = dispersion_growth_rate(sc.params, rho_bar, chi_bar, n * k1);
    fastest = std::max(fastest, sigma);
    if (sigma < 0.0) slowest_decay = std::min(slowest_decay, -sigma);
  }
  const double t_start = 10.0 / slowest_decay;
  std::vector<std::pair<double, double>> window;
  for (const auto& r : tr.records) {
    if (r.time < t_start) continue;
    if (r.sup_chi > 1e-2) break;
    window.emplace_back(r.time, r.sup_chi);
  }
  const double growth = window.size() >= 5 ? log_slope(window)
                                           : std::numeric_limits<double>::quiet_NaN();
  report.checks.push_back(horizon_check("growth_rate_rel_error",
                                        std::abs(growth / fastest - 1.0), "<=", 0.10,
                                        advanced && window.size() >= 5));
  add_conservation(report, tr, true);
  add_kanel(report, sc, tr);
  return report;
}

double max_excursion(const std::vector<DiagnosticsRecord>& records) {
  double e = 0.0;
  for (const auto& r : records) e = std::max({e, r.chi_max - 1.0, -1.0 - r.chi_min});
  return e;
}

bool chi_bimodal(const Field& chi, int bins) {
  std::vector<int> counts(bins, 0);
  for (double v : chi) {
    const int b = static_cast<int>(std::floor((v + 1.0) / 2.0 * bins));
    ++counts[std::clamp(b, 0, bins - 1)];
  }
  std::vector<std::pair<int, int>> peaks;  // (count, bin)
  for (int b = 0; b < bins; ++b) {
    const int left = b > 0 ? counts[b - 1] : -1;
    const int right = b + 1 < bins ? counts[b + 1] : -1;
    if (counts[b] > 0 && counts[b] >= left && counts[b] > right) peaks.emplace_back(counts[b], b);
  }
  if (peaks.size() < 2) return false;
  std::ranges::sort(peaks, std::greater<>());
  auto center = [&](int b) { return -1.0 + (b + 0.5) * 2.0 / bins; };
  const double c1 = center(peaks[0].second);
  const double c2 = center(peaks[1].second);
  return std::min(c1, c2) < -0.5 && std::max(c1, c2) > 0.5;
}

SweepResult run_lambda_sweep(const LambdaSweep& sweep, int workers) {
  const std::size_t count = sweep.lambdas.size();
  std::vector<Trajectory> runs(count);
  parallel_for(count, workers, [&](std::size_t i) {
    Scenario sc = sweep.base;
    sc.params.lambda = sweep.lambdas[i];
    runs[i] = simulate(sc);
  });

  SweepResult result;
  result.lambdas = sweep.lambdas;
  result.report.name = sweep.base.name;
  auto& checks = result.report.checks;
  for (std::size_t i = 0; i < count; ++i) {
    checks.push_back(make_check("run_completed[" + format_number(sweep.lambdas[i]) + "]",
                                runs[i].aborted ? 0.0 : 1.0, "==", 1.0));
    result.excursions.push_back(max_excursion(runs[i].records));
    double chi_peak = 0.0;
    for (const auto& r : runs[i].records) chi_peak = std::max({chi_peak, r.chi_max, -r.chi_min});
    const PotentialModel model{sweep.lambdas[i], sweep.base.params.epsilon};
    checks.push_back(make_check("beta_within_excursion[" + format_number(sweep.lambdas[i]) + "]",
                                std::abs(beta_lambda(chi_peak, model)), "<=",
                                result.excursions.back()));
  }

  // Sort by decreasing lambda for the ordering and slope checks.
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  std::ranges::sort(order, [&](std::size_t a, std::size_t b) {
    return sweep.lambdas[a] > sweep.lambdas[b];
  });
  double worst_step = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < count; ++i) {
    worst_step = std::max(worst_step,
                          result.excursions[order[i]] - result.excursions[order[i - 1]]);
  }
  checks.push_back(make_check("excursion_strictly_decreasing", worst_step, "<", 0.0));

  double slope = std::numeric_limits<double>::quiet_NaN();
  if (std::ranges::all_of(result.excursions, [](double e) { return e > 0.0; })) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < count; ++i) {
      pts.emplace_back(std::log(sweep.lambdas[i]), result.excursions[i]);
    }
    slope = log_slope(pts);
  }
  checks.push_back(make_check("excursion_loglog_slope", slope, ">=", 0.7));

  const auto smallest = order.back();
  checks.push_back(make_check("excursion_at_smallest_lambda", result.excursions[smallest], "<=",
                              5e-3));
  return result;
}

namespace {

// Block average of a fine field onto a coarse grid.
Field restrict_to(const Field& fine, int coarse) {
  const int ratio = static_cast<int>(fine.size()) / coarse;
  Field out(coarse, 0.0);
  for (int j = 0; j < coarse; ++j) {
    double acc = 0.0;
    for (int r = 0; r < ratio; ++r) acc += fine[j * ratio + r];
    out[j] = acc / ratio;
  }
  return out;
}

double state_error(const State& coarse, const State& reference) {
  const int n = static_cast<int>(coarse.rho.size());
  double e = 0.0;
  const Field* cf[] = {&coarse.rho, &coarse.u, &coarse.chi};
  const Field* rf[] = {&reference.rho, &reference.u, &reference.chi};
  for (int f = 0; f < 3; ++f) {
    const Field r = restrict_to(*rf[f], n);
    for (int j = 0; j < n; ++j) e = std::max(e, std::abs((*cf[f])[j] - r[j]));
  }
  return e;
}

}  // namespace

ConvergenceResult run_convergence(const ConvergenceLadder& ladder, int workers) {
  const std::size_t count = ladder.levels.size();
  std::vector<Trajectory> runs(count);
  parallel_for(count, workers, [&](std::size_t i) {
    Scenario sc = ladder.base;
    sc.cells = ladder.levels[i];
    const double dt = ladder.dt_per_h * sc.length / sc.cells;
    sc.controls.dt_max = dt;
    runs[i] = simulate(sc);
  });

  ConvergenceResult result;
  result.levels = ladder.levels;
  result.report.name = ladder.base.name;
  auto& checks = result.report.checks;
  for (std::size_t i = 0; i < count; ++i) {
    checks.push_back(make_check("run_completed[" + std::to_string(ladder.levels[i]) + "]",
                                runs[i].aborted ? 0.0 : 1.0, "==", 1.0));
  }
  const State& reference = runs.back().final_state;
  for (std::size_t i = 0; i + 1 < count; ++i) {
    result.errors.push_back(state_error(runs[i].final_state, reference));
  }
  for (std::size_t i = 1; i < result.errors.size(); ++i) {
    const double ratio = static_cast<double>(ladder.levels[i]) / ladder.levels[i - 1];
    const double order = std::log(result.errors[i - 1] / result.errors[i]) / std::log(ratio);
    result.orders.push_back(order);
    checks.push_back(make_check("order[" + std::to_string(ladder.levels[i - 1]) + "->" +
                                    std::to_string(ladder.levels[i]) + "]",
                                order, ">=", 0.8));
    checks.push_back(make_check("error_decrease[" + std::to_string(ladder.levels[i]) + "]",
                                result.errors[i] - result.errors[i - 1], "<", 0.0));
  }
  for (std::size_t i = 0; i + 1 < result.errors.size(); ++i) {
    if (ladder.levels[i] == 128 && ladder.levels[i + 1] == 256) {
      checks.push_back(make_check("error_ratio[128/256]", result.errors[i] / result.errors[i + 1],
                                  ">=", 1.7));
    }
  }
  return result;
}

DispersionResult measure_dispersion(const DispersionProbe& probe, const Params& params) {
  const Grid grid(1.0, probe.cells, Boundary::Periodic);
  const double k = 2.0 * kPi * probe.wave;
  DispersionResult result;
  result.predicted = dispersion_growth_rate(params, 1.0, probe.chi_bar, k);
  const double horizon = 1.0 / std::abs(result.predicted);

  const State s0 = make_initial(
      grid, PerturbedIC{{1.0, 0.0, probe.chi_bar}, {{FieldId::Chi, probe.wave, probe.amplitude, 0.0}}});
  std::vector<std::pair<double, double>> series;
  Sink sink = [&](const State& st, const StepInfo&) {
    double acc = 0.0;
    for (int j = 0; j < grid.cells(); ++j) {
      acc += (st.chi[j] - probe.chi_bar) * std::cos(k * grid.center(j));
    }
    series.emplace_back(st.time, std::abs(2.0 * acc / grid.cells()));
  };
  RunControls controls;
  controls.dt_max = 0.01 * horizon;
  RunOptions options;
  options.t_end = horizon;
  run(s0, params, grid, controls, options, std::span<const Sink>(&sink, 1));
  result.measured = log_slope(series);
  return result;
}

std::vector<std::string> scenario_names() {
  return {"stable_decay", "spinodal", "mixed_stability", "lambda_sweep", "convergence",
          "convergence_mixed"};
}

std::optional<Scenario> find_scenario(std::string_view name) {
  if (name == "stable_decay") return scenario_stable_decay();
  if (name == "spinodal") return scenario_spinodal();
  if (name == "mixed_stability") return scenario_mixed_stability();
  return std::nullopt;
}

std::optional<ScenarioReport> run_named(std::string_view name, int workers) {
  if (name == "stable_decay" || name == "mixed_stability") {
    const Scenario sc = *find_scenario(name);
    return evaluate_stable(sc, simulate(sc), sc.bc == Boundary::Mixed);
  }
  if (name == "spinodal") {
    const Scenario sc = scenario_spinodal();
    return evaluate_spinodal(sc, simulate(sc));
  }
  if (name == "lambda_sweep") return run_lambda_sweep(scenario_lambda_sweep(), workers).report;
  if (name == "convergence") return run_convergence(scenario_convergence(), workers).report;
  if (name == "convergence_mixed") {
    return run_convergence(scenario_convergence(Boundary::Mixed), workers).report;
  }
  return std::nullopt;
}

}  // namespace nsch
