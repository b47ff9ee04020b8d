#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nsch/grid.hpp"
#include "nsch/potential.hpp"

namespace nsch {

/// Physical and regularization constants. Pressure law p = a rho^gamma.
struct Params {
  double nu = 1.0;
  double epsilon = 0.1;
  double a = 1.0;
  double gamma = 2.0;
  double lambda = 1e-3;

  void validate() const;
  PotentialModel potential() const { return {lambda, epsilon}; }
  double pressure(double rho) const;
  double sound_speed(double rho) const;
};

struct State {
  Field rho;
  Field u;
  Field chi;
  double time = 0.0;
};

struct Averages {
  double rho_bar = 0.0;
  double u_bar = 0.0;
  double chi_bar = 0.0;
};

/// Throws VacuumError when the integrated density is not positive.
Averages averages(const State& state, const Grid& grid);

// ---- initial conditions ----------------------------------------------------

enum class FieldId { Rho, U, Chi };

/// One Fourier perturbation. `wave` is the integer mode index: the wavenumber
/// is 2 pi n / L on periodic grids and pi n / L on mixed grids.
struct Mode {
  FieldId field = FieldId::Chi;
  int wave = 1;
  double amplitude = 0.0;
  double phase = 0.0;
};

struct ConstantIC {
  double rho = 1.0;
  double u = 0.0;
  double chi = 0.0;
};

struct PerturbedIC {
  ConstantIC base;
  std::vector<Mode> modes;
};

/// Band-limited random perturbation of chi with sup-norm `amplitude`.
struct NoiseIC {
  ConstantIC base;
  double amplitude = 1e-4;
  std::uint64_t seed = 1;
};

using InitialCondition = std::variant<ConstantIC, PerturbedIC, NoiseIC>;

/// Samples the initial condition on the grid. On mixed grids u-modes become
/// sine modes and chi-modes cosine modes so the wall conditions hold.
/// Throws ConfigError if rho is not positive or chi leaves [-1, 1].
State make_initial(const Grid& grid, const InitialCondition& ic);

// ---- validation ------------------------------------------------------------

struct ValidationReport {
  double rho_min = 0.0;
  double rho_max = 0.0;
  double chi_min = 0.0;
  double chi_max = 0.0;
  bool non_finite = false;
  bool vacuum = false;
  bool chi_out_of_bounds = false;

  bool ok() const { return !non_finite && !vacuum && !chi_out_of_bounds; }
  std::string describe() const;
};

/// Slack on the chi invariant; discrete solutions overshoot by truncation error.
inline constexpr double kDefaultChiSlack = 1e-6 + 10.0 * 1e-10;

/// Flags vacuum (min rho < floor), NaN/Inf, and chi outside
/// [-1 - lambda - slack, 1 + lambda + slack].
ValidationReport validate(const State& state, double rho_floor, double lambda,
                          double chi_slack = kDefaultChiSlack);

}  // namespace nsch
