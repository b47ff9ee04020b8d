#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "nsch/errors.hpp"
#include "nsch/solver.hpp"
#include "support/oracles.hpp"

using namespace nsch;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

State constant_state(int n, double rho, double u, double chi) {
  return State{Field(n, rho), Field(n, u), Field(n, chi), 0.0};
}

double max_change(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Growth rate from linearizing rho chi_t = mu_xx, mu = f'(chi)/eps - (eps/rho) chi_xx
// about (rho_bar, 0, chi_bar), with f'' taken from the branch oracle numerically.
double linearized_rate(double eps, double rho_bar, double chi_bar, double k) {
  auto f = [](double x) { return oracle::f_lambda(x, 1e-3); };
  const double h = 1e-4;
  const double f2 = (f(chi_bar + h) - 2 * f(chi_bar) + f(chi_bar - h)) / (h * h);
  const double mu_coeff = f2 / eps + eps * k * k / rho_bar;
  return -(k * k / rho_bar) * mu_coeff;
}

// Cosine coefficient of the mode with wave index n on a periodic unit grid.
double cosine_amplitude(const Field& chi, const Grid& g, int n, double mean) {
  double acc = 0.0;
  for (int j = 0; j < g.cells(); ++j) acc += (chi[j] - mean) * std::cos(kTwoPi * n * g.center(j));
  return 2.0 * acc / g.cells();
}

}  // namespace

TEST_CASE("dispersion relation examples") {
  Params p;
  p.epsilon = 0.1;
  CHECK(dispersion_growth_rate(p, 1.0, 0.0, 1.0) == doctest::Approx(9.9).epsilon(1e-14));
  CHECK(dispersion_growth_rate(p, 1.0, 0.8, 1.0) == doctest::Approx(-9.3).epsilon(1e-14));
  CHECK(linearized_rate(0.1, 1.0, 0.0, 1.0) == doctest::Approx(9.9).epsilon(1e-6));
  CHECK(linearized_rate(0.1, 1.0, 0.8, 1.0) == doctest::Approx(-9.3).epsilon(1e-6));
  const double threshold = 1.0 / std::sqrt(3.0);
  for (double k : {0.5, 1.0, 10.0, 100.0}) {
    CHECK(dispersion_growth_rate(p, 1.0, threshold, k) < 0.0);
    CHECK(dispersion_growth_rate(p, 1.0, threshold, k) ==
          doctest::Approx(-p.epsilon * std::pow(k, 4)).epsilon(1e-12));
  }
}

TEST_CASE("property: dispersion formula matches the linearization") {
  oracle::Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    Params p;
    p.epsilon = rng.uniform(0.05, 0.5);
    const double rho_bar = rng.uniform(0.5, 2.0);
    const double chi_bar = rng.uniform(-0.95, 0.95);
    const double k = rng.uniform(0.5, 30.0);
    const double want = linearized_rate(p.epsilon, rho_bar, chi_bar, k);
    CHECK(dispersion_growth_rate(p, rho_bar, chi_bar, k) ==
          doctest::Approx(want).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("chemical potential of constant states") {
  const Grid g = build_grid(1.0, 32, Boundary::Periodic);
  Params p;
  for (double c : {1.0, 0.0, -1.0}) {
    for (double v : chemical_potential(constant_state(32, 1.3, 0.0, c), p, g)) CHECK(v == 0.0);
  }
  CHECK_THROWS_AS(chemical_potential(constant_state(32, 1e-9, 0.0, 0.0), p, g, 1e-8), VacuumError);
}

TEST_CASE("chemical potential linearizes about a constant state") {
  Params p;
  p.epsilon = 0.1;
  const double chi_bar = 0.8, rho_bar = 1.2, amp = 1e-6;
  const Grid g = build_grid(1.0, 256, Boundary::Periodic);
  State s = constant_state(256, rho_bar, 0.0, chi_bar);
  for (int j = 0; j < 256; ++j) s.chi[j] += amp * std::cos(kTwoPi * g.center(j));
  const Field mu = chemical_potential(s, p, g);
  const double base = oracle::central_derivative([](double x) { return oracle::f_lambda(x, 1e-3); },
                                                 chi_bar, 1e-3) / p.epsilon;
  const double k = kTwoPi;
  const double coeff = (3 * chi_bar * chi_bar - 1) / p.epsilon + p.epsilon * k * k / rho_bar;
  for (int j = 0; j < 256; ++j) {
    const double want = coeff * amp * std::cos(k * g.center(j));
    CHECK(std::abs(mu[j] - base - want) <= 1e-3 * coeff * amp);
  }
}

TEST_CASE("property: constant states are fixed points of a step") {
  oracle::Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const Boundary bc = trial % 2 ? Boundary::Mixed : Boundary::Periodic;
    const Grid g = build_grid(1.0, 64, bc);
    const double rho = rng.uniform(0.5, 2.0);
    const double chi = rng.uniform(-1.0, 1.0);
    const double u = bc == Boundary::Periodic ? rng.uniform(-1.0, 1.0) : 0.0;
    const State s = constant_state(64, rho, u, chi);
    StepControls c;
    c.dt = rng.uniform(1e-4, 1e-2);
    const StepResult r = step(s, Params{}, g, c);
    CAPTURE(trial);
    CHECK(max_change(r.state.rho, s.rho) <= 1e-13);
    CHECK(max_change(r.state.u, s.u) <= 1e-13);
    CHECK(max_change(r.state.chi, s.chi) <= 1e-13);
    CHECK(r.state.time == doctest::Approx(s.time + c.dt));
  }
}

TEST_CASE("property: periodic steps conserve mass, momentum and rho chi") {
  oracle::Rng rng(31);
  const Grid g = build_grid(1.0, 128, Boundary::Periodic);
  for (int trial = 0; trial < 10; ++trial) {
    PerturbedIC ic{{rng.uniform(0.8, 1.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)}, {}};
    for (FieldId f : {FieldId::Rho, FieldId::U, FieldId::Chi}) {
      ic.modes.push_back(Mode{f, rng.integer(1, 4), rng.uniform(0.0, 0.2), rng.uniform(0.0, 6.0)});
    }
    const State s = make_initial(g, ic);
    StepControls c;
    c.dt = 1e-4;
    const State n = step(s, Params{}, g, c).state;
    auto moments = [&](const State& x) {
      Field m(x.rho.size()), q(x.rho.size());
      for (std::size_t j = 0; j < m.size(); ++j) {
        m[j] = x.rho[j] * x.u[j];
        q[j] = x.rho[j] * x.chi[j];
      }
      return std::array<double, 3>{integrate(x.rho, g), integrate(m, g), integrate(q, g)};
    };
    const auto a = moments(s), b = moments(n);
    CAPTURE(trial);
    CHECK(std::abs(b[0] - a[0]) <= 1e-12 * a[0]);
    CHECK(std::abs(b[1] - a[1]) <= 1e-12 * std::max(std::abs(a[1]), a[0]));
    CHECK(std::abs(b[2] - a[2]) <= 1e-12 * std::max(std::abs(a[2]), a[0]));
  }
}

TEST_CASE("one step scales a small mode by exp(sigma dt)") {
  Params p;
  const Grid g = build_grid(1.0, 256, Boundary::Periodic);
  for (double chi_bar : {0.0, 0.8}) {
    const double amp = 1e-6;
    State s = constant_state(256, 1.0, 0.0, chi_bar);
    for (int j = 0; j < 256; ++j) s.chi[j] += amp * std::cos(kTwoPi * g.center(j));
    const double sigma = dispersion_growth_rate(p, 1.0, chi_bar, kTwoPi);
    StepControls c;
    c.dt = 0.01 / std::abs(sigma);
    const State n = step(s, p, g, c).state;
    const double ratio = cosine_amplitude(n.chi, g, 1, chi_bar) / amp;
    CAPTURE(chi_bar);
    CHECK(std::abs(ratio - std::exp(sigma * c.dt)) <= 0.02 * std::abs(sigma * c.dt));
  }
}

TEST_CASE("step reports its Picard iterations and is deterministic") {
  const Grid g = build_grid(1.0, 64, Boundary::Mixed);
  PerturbedIC ic{{1.0, 0.0, 0.8}, {Mode{FieldId::Rho, 1, 0.3, 0}, Mode{FieldId::U, 1, 0.5, 0}}};
  const State s = make_initial(g, ic);
  StepControls c;
  c.dt = 1e-3;
  const StepResult a = step(s, Params{}, g, c);
  const StepResult b = step(s, Params{}, g, c);
  CHECK(a.report.picard_iters >= 1);
  CHECK(a.report.final_change <= c.picard_tol);
  CHECK(a.state.rho == b.state.rho);
  CHECK(a.state.u == b.state.u);
  CHECK(a.state.chi == b.state.chi);
  CHECK(std::abs(a.state.u.front()) < 0.1);
}

TEST_CASE("step and run validate their controls") {
  const Grid g = build_grid(1.0, 16, Boundary::Periodic);
  const State s = constant_state(16, 1.0, 0.0, 0.0);
  StepControls c;
  c.dt = 0.0;
  CHECK_THROWS_AS(step(s, Params{}, g, c), ConfigError);
  c = StepControls{};
  c.cfl = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = StepControls{};
  c.picard_max = 1;
  c.picard_tol = 1e-300;
  PerturbedIC ic{{1.0, 0.0, 0.0}, {Mode{FieldId::Rho, 1, 0.3, 0}}};
  CHECK_THROWS_AS(step(make_initial(g, ic), Params{}, g, c), ConvergenceError);

  RunControls rc;
  RunOptions o;
  o.t_end = -1.0;
  CHECK_THROWS_AS(run(s, Params{}, g, rc, o, {}), ConfigError);
}

TEST_CASE("cfl time step") {
  const Grid g = build_grid(1.0, 100, Boundary::Periodic);
  CHECK(std::isinf(cfl_time_step(constant_state(100, 1.0, 0.0, 0.0), g, 0.5)));
  CHECK(cfl_time_step(constant_state(100, 1.0, -2.0, 0.0), g, 0.5) == doctest::Approx(0.0025));
}

TEST_CASE("run with t_end at the initial time returns the state unchanged") {
  const Grid g = build_grid(1.0, 32, Boundary::Periodic);
  PerturbedIC ic{{1.0, 0.0, 0.8}, {Mode{FieldId::Chi, 1, 0.01, 0}}};
  const State s = make_initial(g, ic);
  int seen = 0;
  const std::vector<Sink> sinks{[&](const State&, const StepInfo&) { ++seen; }};
  RunOptions o;
  o.t_end = 0.0;
  const RunSummary r = run(s, Params{}, g, RunControls{}, o, sinks);
  CHECK(r.steps == 0);
  CHECK(r.final_state.chi == s.chi);
  CHECK(r.final_state.time == s.time);
}

TEST_CASE("run of a constant state keeps every record constant") {
  const Grid g = build_grid(1.0, 32, Boundary::Mixed);
  const State s = constant_state(32, 1.1, 0.0, 0.3);
  std::vector<State> seen;
  const std::vector<Sink> sinks{[&](const State& x, const StepInfo&) { seen.push_back(x); }};
  RunControls rc;
  rc.dt_max = 0.05;
  RunOptions o;
  o.t_end = 1.0;
  o.record_every = 4;
  const RunSummary r = run(s, Params{}, g, rc, o, sinks);
  CHECK(r.final_state.time == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(seen.size() >= 2);
  for (const State& x : seen) {
    CHECK(max_change(x.rho, s.rho) <= 1e-13);
    CHECK(max_change(x.chi, s.chi) <= 1e-13);
  }
}

TEST_CASE("run lands exactly on stop times") {
  const Grid g = build_grid(1.0, 32, Boundary::Periodic);
  const State s = constant_state(32, 1.0, 0.0, 0.8);
  std::vector<double> hits;
  RunControls rc;
  rc.dt_max = 0.03;
  RunOptions o;
  o.t_end = 0.2;
  o.stop_times = {0.05, 0.1};
  o.on_stop = [&](const State& x) { hits.push_back(x.time); };
  run(s, Params{}, g, rc, o, {});
  REQUIRE(hits.size() == 2);
  CHECK(hits[0] == 0.05);
  CHECK(hits[1] == 0.1);
}
