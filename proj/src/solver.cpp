#include "nsch/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nsch/errors.hpp"
#include "nsch/potential.hpp"

namespace nsch {

void StepControls::validate() const {
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (picard_max < 1) throw ConfigError("picard_max must be >= 1");
  if (!(picard_tol > 0.0)) throw ConfigError("picard_tol must be > 0");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
  if (!(rho_floor > 0.0)) throw ConfigError("rho_floor must be > 0");
}

void RunControls::validate() const {
  step.validate();
  if (!(dt_max > 0.0)) throw ConfigError("dt_max must be > 0");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
}

BandedSystem second_difference(const Grid& grid, FieldKind kind) {
  const int n = grid.cells();
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  BandedSystem d2(n, 1, grid.periodic());
  for (int i = 0; i < n; ++i) {
    d2.at(i, -1) = inv_h2;
    d2.at(i, 0) = -2.0 * inv_h2;
    d2.at(i, 1) = inv_h2;
  }
  if (!grid.periodic()) {
    // Ghost cell folded into the diagonal: +1 for even, -1 for odd reflection.
    const double fold = kind == FieldKind::DirichletZero ? -1.0 : 1.0;
    d2.at(0, -1) = 0.0;
    d2.at(n - 1, 1) = 0.0;
    d2.at(0, 0) += fold * inv_h2;
    d2.at(n - 1, 0) += fold * inv_h2;
  }
  return d2;
}

Field chemical_potential(const State& s, const Params& params, const Grid& grid,
                         double rho_floor) {
  const double rmin = *std::ranges::min_element(s.rho);
  if (!(rmin > rho_floor)) {
    throw VacuumError("chemical_potential: min rho " + std::to_string(rmin) +
                      " at or below floor");
  }
  const auto model = params.potential();
  const Field chi_xx = diff(s.chi, 2, grid, FieldKind::NeumannLike);
  Field mu(s.chi.size());
  for (std::size_t j = 0; j < mu.size(); ++j) {
    mu[j] = df_lambda(s.chi[j], model) / params.epsilon - params.epsilon / s.rho[j] * chi_xx[j];
  }
  return mu;
}

double cfl_time_step(const State& s, const Grid& grid, double cfl) {
  double umax = 0.0;
  for (double v : s.u) umax = std::max(umax, std::abs(v));
  if (umax == 0.0) return std::numeric_limits<double>::infinity();
  return cfl * grid.spacing() / umax;
}

double dispersion_growth_rate(const Params& p, double rho_bar, double chi_bar, double k) {
  const double k2 = k * k;
  return -(p.epsilon / (rho_bar * rho_bar)) * k2 * k2 -
         ((3.0 * chi_bar * chi_bar - 1.0) / (p.epsilon * rho_bar)) * k2;
}

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Face f separates cells f-1 and f; faces 0 and n coincide on periodic grids.
struct Faces {
  std::vector<double> velocity;  // n + 1
  std::vector<int> upwind;       // donor cell
  std::vector<double> mass;      // upwind mass flux
};

Faces build_faces(const Grid& g, std::span<const double> rho, std::span<const double> u) {
  const int n = g.cells();
  Faces f{std::vector<double>(n + 1, 0.0), std::vector<int>(n + 1, 0),
          std::vector<double>(n + 1, 0.0)};
  for (int j = 1; j < n; ++j) {
    const double v = 0.5 * (u[j - 1] + u[j]);
    f.velocity[j] = v;
    f.upwind[j] = v >= 0.0 ? j - 1 : j;
    f.mass[j] = v * rho[f.upwind[j]];
  }
  if (g.periodic()) {
    const double v = 0.5 * (u[n - 1] + u[0]);
    const int donor = v >= 0.0 ? n - 1 : 0;
    f.velocity[0] = f.velocity[n] = v;
    f.upwind[0] = f.upwind[n] = donor;
    f.mass[0] = f.mass[n] = v * rho[donor];
  } else {
    f.upwind[0] = 0;
    f.upwind[n] = n - 1;
  }
  return f;
}

void apply_divergence(std::span<double> x, std::span<const double> flux, double dt_over_h) {
  for (std::size_t j = 0; j < x.size(); ++j) x[j] -= dt_over_h * (flux[j + 1] - flux[j]);
}

// x += scale * D2 w, evaluated as a difference of face fluxes so that the sum telescopes.
void add_second_difference(std::span<double> x, std::span<const double> w, double scale,
                           const Grid& g, FieldKind kind) {
  const int n = g.cells();
  const double h = g.spacing();
  std::vector<double> flux(n + 1);
  for (int f = 1; f < n; ++f) flux[f] = (w[f] - w[f - 1]) / h;
  if (g.periodic()) {
    flux[0] = flux[n] = (w[0] - w[n - 1]) / h;
  } else {
    const double odd = kind == FieldKind::DirichletZero ? 1.0 : 0.0;
    flux[0] = odd * 2.0 * w[0] / h;
    flux[n] = -odd * 2.0 * w[n - 1] / h;
  }
  for (int j = 0; j < n; ++j) x[j] += scale / h * (flux[j + 1] - flux[j]);
}

}  // namespace

StepResult step(const State& s, const Params& params, const Grid& grid,
                const StepControls& c) {
  c.validate();
  const int n = grid.cells();
  const double h = grid.spacing();
  const double dt = c.dt;
  const double eps = params.epsilon;
  const auto model = params.potential();
  const bool periodic = grid.periodic();

  const BandedSystem d2_u = second_difference(grid, FieldKind::DirichletZero);
  const BandedSystem d2_chi = second_difference(grid, FieldKind::NeumannLike);

  Field mom0(n), q0(n);
  for (int j = 0; j < n; ++j) {
    mom0[j] = s.rho[j] * s.u[j];
    q0[j] = s.rho[j] * s.chi[j];
  }

  Field rho = s.rho, u = s.u, chi = s.chi;
  double chi_ref = 0.0;
  for (double v : s.chi) chi_ref += v;
  chi_ref /= n;
  Field rho_next(n), rhs(n), coeff(n), stiff(n), lagged(n), u_cons(n), chi_cons(n);
  std::vector<double> mom_flux(n + 1), chi_flux(n + 1);

  StepReport report;
  double previous_change = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= c.picard_max; ++it) {
    const Faces faces = build_faces(grid, s.rho, u);

    // (a) continuity
    rho_next = s.rho;
    apply_divergence(rho_next, faces.mass, dt / h);
    const double rmin = *std::ranges::min_element(rho_next);
    if (!(rmin >= c.rho_floor)) {
      throw VacuumError("density " + std::to_string(rmin) + " below floor at t=" +
                        std::to_string(s.time + dt));
    }

    // (b) momentum
    for (int f = 0; f <= n; ++f) {
      const bool wall = !periodic && (f == 0 || f == n);
      const int left = f == 0 ? (periodic ? n - 1 : 0) : f - 1;
      const int right = f == n ? (periodic ? 0 : n - 1) : f;
      const double p_face =
          0.5 * (params.pressure(rho_next[left]) + params.pressure(rho_next[right]));
      double capillary = 0.0;
      if (!wall) {
        const double slope = (chi[right] - chi[left]) / h;
        capillary = 0.5 * eps * slope * slope;
      }
      mom_flux[f] = faces.mass[f] * s.u[faces.upwind[f]] + p_face + capillary;
      chi_flux[f] = faces.mass[f] * s.chi[faces.upwind[f]];
    }
    if (periodic) {
      mom_flux[n] = mom_flux[0];
      chi_flux[n] = chi_flux[0];
    }
    rhs = mom0;
    apply_divergence(rhs, mom_flux, dt / h);
    BandedSystem mom_op = d2_u;
    mom_op *= -dt * params.nu;
    mom_op += BandedSystem::diagonal(rho_next, periodic);
    Field u_next = solve_banded(mom_op, rhs);
    add_second_difference(rhs, u_next, dt * params.nu, grid, FieldKind::DirichletZero);
    for (int j = 0; j < n; ++j) u_cons[j] = rhs[j] / rho_next[j];

    // (c) concentration, solved for the deviation from a constant so that the
    // rounding of the stiff operator scales with the deviation, not with chi.
    for (int j = 0; j < n; ++j) {
      coeff[j] = eps / rho_next[j];
      stiff[j] = std::max(d2f_lambda(chi[j], model), 0.0);
      lagged[j] = df_lambda(chi[j], model) - stiff[j] * (chi[j] - chi_ref);
    }
    const Field lagged_xx = d2_chi.apply(lagged);
    Field transported = q0;
    apply_divergence(transported, chi_flux, dt / h);
    for (int j = 0; j < n; ++j) {
      rhs[j] = transported[j] - rho_next[j] * chi_ref + dt / eps * lagged_xx[j];
    }

    BandedSystem chi_op = d2_chi.scale_columns(coeff) * d2_chi;
    chi_op *= dt;
    BandedSystem convex = d2_chi.scale_columns(stiff);
    convex *= -dt / eps;
    chi_op += convex;
    chi_op += BandedSystem::diagonal(rho_next, periodic);
    const Field dev = solve_banded(chi_op, rhs);
    const Field dev_xx = d2_chi.apply(dev);
    Field mu(n), chi_next(n);
    for (int j = 0; j < n; ++j) {
      mu[j] = (lagged[j] + stiff[j] * dev[j]) / eps - coeff[j] * dev_xx[j];
      chi_next[j] = chi_ref + dev[j];
    }
    add_second_difference(transported, mu, dt, grid, FieldKind::NeumannLike);
    for (int j = 0; j < n; ++j) chi_cons[j] = transported[j] / rho_next[j];

    const double u_scale = std::max(max_abs(u_next), params.sound_speed(max_abs(rho_next)));
    const double change =
        std::max({max_diff(rho_next, rho) / max_abs(rho_next), max_diff(u_next, u) / u_scale,
                  max_diff(chi_next, chi) / std::max(max_abs(chi_next), 1.0)});

    rho = rho_next;
    u = std::move(u_next);
    chi = std::move(chi_next);
    report.picard_iters = it;
    report.final_change = change;
    if (it > 2 && change > previous_change) report.contraction_monotone = false;
    previous_change = change;
    if (change < c.picard_tol) {
      // Iterates stay on the raw solves; the conservative forms differ by solve residuals only.
      return {State{std::move(rho), std::move(u_cons), std::move(chi_cons), s.time + dt},
              report};
    }
  }
  throw ConvergenceError("Picard loop did not converge at t=" + std::to_string(s.time) +
                             " (change " + std::to_string(report.final_change) + ")",
                         report.picard_iters, report.final_change);
}

RunSummary run(State state, const Params& params, const Grid& grid, const RunControls& controls,
               const RunOptions& options, std::span<const Sink> sinks) {
  RunSummary summary;
  const double t0 = state.time;
  if (options.t_end < t0) throw ConfigError("run: t_end precedes the initial time");
  if (options.record_every < 1) throw ConfigError("run: record_every must be >= 1");
  if (options.t_end == t0) {
    summary.final_state = std::move(state);
    return summary;
  }

  std::vector<double> stops;
  for (double t : options.stop_times) {
    if (t > t0 && t < options.t_end) stops.push_back(t);
  }
  std::ranges::sort(stops);
  stops.push_back(options.t_end);
  std::size_t next_stop = 0;

  auto emit = [&](const State& st, const StepInfo& info) {
    for (const Sink& sink : sinks) sink(st, info);
    ++summary.records;
  };
  emit(state, StepInfo{0, 0.0, 0});

  summary.dt_min = std::numeric_limits<double>::infinity();
  while (next_stop < stops.size()) {
    const double target = stops[next_stop];
    double dt = std::min(controls.dt_max, cfl_time_step(state, grid, controls.step.cfl));
    bool lands = false;
    // Land exactly on the target instead of leaving a sliver step.
    if (state.time + dt >= target - 1e-12 * std::max(1.0, std::abs(target))) {
      dt = target - state.time;
      lands = true;
    }
    int attempts = 0;
    for (;;) {
      StepControls sc = controls.step;
      sc.dt = dt;
      try {
        StepResult r = step(state, params, grid, sc);
        if (lands) r.state.time = target;
        if (!r.report.contraction_monotone) ++summary.non_monotone_steps;
        state = std::move(r.state);
        ++summary.steps;
        summary.dt_min = std::min(summary.dt_min, dt);
        summary.dt_max = std::max(summary.dt_max, dt);
        const StepInfo info{summary.steps, dt, r.report.picard_iters};
        const bool last = lands && next_stop + 1 == stops.size();
        if (summary.steps % options.record_every == 0 || last) emit(state, info);
        break;
      } catch (const std::runtime_error& e) {
        const bool recoverable = dynamic_cast<const ConvergenceError*>(&e) ||
                                 dynamic_cast<const VacuumError*>(&e) ||
                                 dynamic_cast<const SingularMatrixError*>(&e);
        if (!recoverable || attempts >= controls.max_retries) {
          throw RunAborted(std::string("step failed after ") + std::to_string(attempts) +
                               " retries: " + e.what(),
                           state);
        }
        ++attempts;
        ++summary.retries;
        dt *= 0.5;
        lands = false;
      }
    }
    if (lands) {
      if (next_stop + 1 < stops.size() && options.on_stop) options.on_stop(state);
      ++next_stop;
    }
  }
  summary.final_state = std::move(state);
  return summary;
}

}  // namespace nsch
