#pragma once

#include <span>
#include <utility>
#include <vector>

#include "nsch/grid.hpp"
#include "nsch/solver.hpp"
#include "nsch/state.hpp"

namespace nsch {

struct DiagnosticsRecord {
  double time = 0.0;
  double mass = 0.0;      // int rho
  double momentum = 0.0;  // int rho u
  double chi_mass = 0.0;  // int rho chi
  double energy = 0.0;
  double sup_rho = 0.0;  // max |rho - rho_bar|
  double sup_u = 0.0;    // max |u - u_bar|
  double sup_chi = 0.0;  // max |chi - chi_bar|
  double chi_min = 0.0;
  double chi_max = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  double psi_min = 0.0;
  double psi_max = 0.0;
  int picard_iters = 0;
};

/// Relative pressure potential G(rho) = rho int_{rho_bar}^{rho} (p(s) - p(rho_bar)) / s^2 ds
/// in closed form. G(rho_bar) = 0, G >= 0, convex. Throws DomainError for rho <= 0.
double g_function(double rho, double rho_bar, double a, double gamma);

/// Kanel's function Psi(rho) = int_{rho_bar}^{rho} sqrt(G(s)) / s^{3/2} ds, signed,
/// by adaptive Gauss-Kronrod quadrature. Throws DomainError for rho <= 0.
double kanel_psi(double rho, double rho_bar, double a, double gamma);

/// Inverse of kanel_psi by bracketing bisection.
double kanel_psi_inverse(double psi, double rho_bar, double a, double gamma);

/// E = int ( rho u^2 / 2 + eps/2 chi_x^2 + G(rho) + rho f_lambda(chi) / eps ) dx.
/// chi_x is taken on cell faces so that the gradient term pairs with the
/// compact second difference used by the solver; wall faces contribute zero.
double total_energy(const State& state, const Params& params, const Grid& grid,
                    const Averages& avgs);

/// Same functional with the quartic 1/4 (chi^2 - 1)^2 in place of f_lambda;
/// a lower bound of total_energy.
double quartic_energy(const State& state, const Params& params, const Grid& grid,
                      const Averages& avgs);

/// Energy including the density-gradient cross terms
/// nu^2/4 rho |(1/rho)_x|^2 - nu/2 rho u (1/rho)_x + rho chi^2. Observable only.
double modified_energy(const State& state, const Params& params, const Grid& grid,
                       const Averages& avgs);

/// Fully populated record; sup deviations are measured against `avgs`.
DiagnosticsRecord record(const State& state, const Params& params, const Grid& grid,
                         const Averages& avgs, int picard_iters);

/// Least-squares slope of log(value) against time over the trailing half of
/// the series. Needs >= 5 positive samples; throws std::invalid_argument
/// otherwise or when every value is equal.
double decay_rate(std::span<const std::pair<double, double>> series);

/// Constant state the trajectory from `state` tends to: the conserved means,
/// except that walls bring the fluid to rest (u_bar = 0 on mixed grids).
Averages asymptotic_state(const State& state, const Grid& grid);

/// Sink that appends a DiagnosticsRecord for every state it sees, using the
/// asymptotic_state of the first state.
class Recorder {
 public:
  Recorder(const Params& params, const Grid& grid) : params_(params), grid_(grid) {}

  void operator()(const State& state, const StepInfo& info);
  Sink sink();

  const std::vector<DiagnosticsRecord>& records() const { return records_; }
  const Averages& initial_averages() const { return avgs_; }

 private:
  Params params_;
  Grid grid_;
  bool have_avgs_ = false;
  Averages avgs_;
  std::vector<DiagnosticsRecord> records_;
};

}  // namespace nsch
