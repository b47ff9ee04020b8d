#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsch/diagnostics.hpp"
#include "nsch/grid.hpp"
#include "nsch/solver.hpp"
#include "nsch/state.hpp"

namespace nsch {

/// A fully specified run: geometry, constants, initial data, numerics, horizon.
struct Scenario {
  std::string name;
  double length = 1.0;
  int cells = 256;
  Boundary bc = Boundary::Periodic;
  Params params;
  InitialCondition initial = ConstantIC{};
  RunControls controls;
  double t_end = 0.0;
  int record_every = 1;
  // Pinned regression bound on max |Psi(rho)| along the trajectory.
  double psi_bound = 1.0;

  Grid grid() const { return Grid(length, cells, bc); }
};

enum class CheckStatus { Pass, Fail, InsufficientHorizon };

std::string to_string(CheckStatus status);

struct Check {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<=", ">=", "<", ">" or "=="
  CheckStatus status = CheckStatus::Fail;
};

/// Builds a check by comparing measured against threshold with `relation`.
Check make_check(std::string name, double measured, std::string relation, double threshold);

struct Trajectory {
  std::vector<DiagnosticsRecord> records;
  State initial_state;
  State final_state;
  Averages averages;
  RunSummary summary;
  bool aborted = false;
  std::string abort_reason;
};

/// Runs the scenario, recording every record_every-th step. A RunAborted is
/// caught and reported through `aborted`; final_state is then the last good state.
Trajectory simulate(const Scenario& scenario, std::span<const Sink> extra_sinks = {});

struct ScenarioReport {
  std::string name;
  std::vector<Check> checks;

  /// True when no check failed; insufficient-horizon checks do not count as failures.
  bool passed() const;
  /// One line per check: name, measured value, relation, threshold, status.
  std::string summary() const;
};

// ---- canned experiments ----------------------------------------------------

/// Slowest linear decay rate among chi diffusion and the acoustic-viscous
/// branch at wavenumber k about (rho_bar, 0, chi_bar). Positive.
double slowest_decay_rate(const Params& params, double rho_bar, double chi_bar, double k);

/// Periodic, L = 1, N = 256, rho 1 + 0.5 cos, u sin, chi chi_bar + 0.01 cos, all at k = 2 pi.
/// t_end = 10 / slowest_decay_rate at k = 2 pi.
Scenario scenario_stable_decay(double chi_bar = 0.8);

/// Periodic, L = 1, N = 256, chi_bar = 0 with seeded noise of sup 1e-4.
/// t_end covers linear growth from the noise level plus 8 e-folds of the
/// fastest rate.
Scenario scenario_spinodal(double lambda = 1e-3, std::uint64_t seed = 42);

/// Wall-bounded copy of the stable scenario with the lowest wall modes
/// (cos pi x for rho and chi, sin pi x for u); t_end from k = pi / L.
Scenario scenario_mixed_stability(double chi_bar = 0.8);

struct LambdaSweep {
  Scenario base;
  std::vector<double> lambdas{1e-1, 1e-2, 1e-3};
};
LambdaSweep scenario_lambda_sweep();

struct ConvergenceLadder {
  Scenario base;  // cells is overwritten per level
  std::vector<int> levels{64, 128, 256, 512};
  double dt_per_h = 1.0 / 16.0;
};
ConvergenceLadder scenario_convergence(Boundary bc = Boundary::Periodic);

// ---- evaluation ------------------------------------------------------------

ScenarioReport evaluate_stable(const Scenario& scenario, const Trajectory& trajectory,
                               bool walls);
ScenarioReport evaluate_spinodal(const Scenario& scenario, const Trajectory& trajectory);

struct SweepResult {
  std::vector<double> lambdas;
  std::vector<double> excursions;
  ScenarioReport report;
};
SweepResult run_lambda_sweep(const LambdaSweep& sweep, int workers = 1);

struct ConvergenceResult {
  std::vector<int> levels;
  std::vector<double> errors;  // against the finest level, one fewer than levels
  std::vector<double> orders;
  ScenarioReport report;
};
ConvergenceResult run_convergence(const ConvergenceLadder& ladder, int workers = 1);

/// Measured growth rate of a single chi mode (periodic, L = 1) by least squares
/// on log |Fourier coefficient| over |sigma| t <= 1 with dt = 0.01 / |sigma|.
struct DispersionProbe {
  double chi_bar = 0.0;
  int wave = 1;
  int cells = 512;
  double amplitude = 1e-6;
};
struct DispersionResult {
  double predicted = 0.0;
  double measured = 0.0;
};
DispersionResult measure_dispersion(const DispersionProbe& probe, const Params& params = {});

/// Histogram of chi over [-1, 1] in `bins` bins; true when the two largest
/// local maxima both lie outside (-0.5, 0.5) on opposite sides.
bool chi_bimodal(const Field& chi, int bins = 20);

/// Excursion max(0, max chi - 1, -1 - min chi) over a record stream.
double max_excursion(const std::vector<DiagnosticsRecord>& records);

std::vector<std::string> scenario_names();

/// Runs a named scenario (stable_decay, spinodal, mixed_stability,
/// lambda_sweep, convergence, convergence_mixed). Returns nullopt for an unknown name.
std::optional<ScenarioReport> run_named(std::string_view name, int workers = 1);

/// Base scenario for a name with a single trajectory; nullopt otherwise.
std::optional<Scenario> find_scenario(std::string_view name);

}  // namespace nsch
