#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsch/banded.hpp"
#include "nsch/grid.hpp"
#include "nsch/state.hpp"

namespace nsch {

struct StepControls {
  double dt = 1e-3;
  int picard_max = 50;
  double picard_tol = 1e-10;
  double cfl = 0.5;
  double rho_floor = 1e-8;

  void validate() const;
};

struct StepReport {
  int picard_iters = 0;
  double final_change = 0.0;
  // False if some iterate-to-iterate change grew; logged, never fatal.
  bool contraction_monotone = true;
};

struct StepResult {
  State state;
  StepReport report;
};

/// mu = f_lambda'(chi) / eps - (eps / rho) chi_xx, chi_x = 0 closure on mixed grids.
/// Throws VacuumError when min rho <= rho_floor.
Field chemical_potential(const State& state, const Params& params, const Grid& grid,
                         double rho_floor = 0.0);

/// Second-difference operator with the wall closure for `kind`.
BandedSystem second_difference(const Grid& grid, FieldKind kind);

/// One time level t -> t + controls.dt.
///
/// Each Picard iterate freezes the transport velocity, the capillary stress
/// and the potential derivative at the previous iterate:
///   rho:     conservative upwind update with face velocities of u^(k-1);
///   rho u:   upwind convection, pressure from rho^(k), implicit viscosity
///            (tridiagonal, cyclic on periodic grids);
///   rho chi: upwind convection with the mass flux above, implicit
///            D2 (eps/rho D2 chi) and the convex part of f'' linearized about
///            chi^(k-1) (pentadiagonal, cyclic on periodic grids).
/// Throws ConfigError for invalid controls, VacuumError, ConvergenceError or
/// SingularMatrixError.
StepResult step(const State& state, const Params& params, const Grid& grid,
                const StepControls& controls);

/// Advective limit cfl * h / max|u| (infinite for u = 0).
double cfl_time_step(const State& state, const Grid& grid, double cfl);

/// Growth rate of exp(i k x) for the chi equation linearized about
/// (rho_bar, 0, chi_bar) with u frozen:
///   sigma = -(eps / rho_bar^2) k^4 - ((3 chi_bar^2 - 1) / (eps rho_bar)) k^2
double dispersion_growth_rate(const Params& params, double rho_bar, double chi_bar, double k);

// ---- time integration ------------------------------------------------------

struct RunControls {
  StepControls step;
  double dt_max = 1e-3;
  int max_retries = 8;

  void validate() const;
};

struct StepInfo {
  long step = 0;
  double dt = 0.0;
  int picard_iters = 0;
};

using Sink = std::function<void(const State&, const StepInfo&)>;

struct RunOptions {
  double t_end = 0.0;
  int record_every = 1;
  /// Times at which the integrator lands exactly and calls on_stop.
  std::vector<double> stop_times;
  std::function<void(const State&)> on_stop;
};

struct RunSummary {
  State final_state;
  long steps = 0;
  long records = 0;
  long retries = 0;
  long non_monotone_steps = 0;
  double dt_min = 0.0;
  double dt_max = 0.0;
};

/// Raised when a step fails after the retry budget; carries the last good state.
class RunAborted : public std::runtime_error {
 public:
  RunAborted(const std::string& what, State snapshot)
      : std::runtime_error(what), snapshot_(std::move(snapshot)) {}
  const State& snapshot() const { return snapshot_; }

 private:
  State snapshot_;
};

/// Advances to options.t_end with dt = min(dt_max, cfl h / max|u|), halving dt
/// on step failure. Sinks see the initial state, every record_every-th step
/// and the final state. t_end == state0.time returns immediately.
RunSummary run(State state0, const Params& params, const Grid& grid, const RunControls& controls,
               const RunOptions& options, std::span<const Sink> sinks);

}  // namespace nsch
