// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance               all criteria
//   acceptance --criterion 4 only criterion 4
//
// Exit status is 0 only when every selected criterion passes.

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <limits>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "nsch/diagnostics.hpp"
#include "nsch/output.hpp"
#include "nsch/potential.hpp"
#include "nsch/scenarios.hpp"
#include "nsch/solver.hpp"
#include "support/oracles.hpp"

using namespace nsch;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string num(double v) {
  std::ostringstream o;
  o.precision(4);
  o << v;
  return o.str();
}

double drift(double now, double start, double scale) { return std::abs(now - start) / scale; }

// Largest relative drift of mass, momentum and rho chi over a record stream.
std::array<double, 3> conservation_drifts(const std::vector<DiagnosticsRecord>& recs) {
  const auto& a = recs.front();
  std::array<double, 3> d{0, 0, 0};
  for (const auto& r : recs) {
    d[0] = std::max(d[0], drift(r.mass, a.mass, std::abs(a.mass)));
    d[1] = std::max(d[1], drift(r.momentum, a.momentum, std::max(std::abs(a.momentum), a.mass)));
    d[2] = std::max(d[2], drift(r.chi_mass, a.chi_mass, std::max(std::abs(a.chi_mass), a.mass)));
  }
  return d;
}

double max_energy_increase(const std::vector<DiagnosticsRecord>& recs) {
  double inc = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < recs.size(); ++i) inc = std::max(inc, recs[i].energy - recs[i - 1].energy);
  return inc;
}

const Check* find_check(const ScenarioReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

void report_checks(Outcome& out, const ScenarioReport& r) {
  for (const auto& c : r.checks) {
    if (c.status == CheckStatus::Fail) out.require(false, r.name + "." + c.name + " = " + num(c.measured));
  }
}

// Trajectories are shared between criteria when running the whole suite.
const Trajectory& trajectory(const Scenario& sc) {
  static std::map<std::string, Trajectory> cache;
  auto it = cache.find(sc.name);
  if (it == cache.end()) it = cache.emplace(sc.name, simulate(sc)).first;
  return it->second;
}

Outcome conservation() {
  Outcome out;
  Scenario sp = scenario_spinodal();
  sp.name = "spinodal_long";
  sp.t_end = 1e4 * sp.controls.dt_max;
  sp.record_every = 10;
  const Trajectory& tr = trajectory(sp);
  out.require(!tr.aborted, "spinodal run aborted: " + tr.abort_reason);
  const auto d = conservation_drifts(tr.records);
  out.detail << "spinodal steps=" << tr.summary.steps << " drift(mass,mom,chi)=" << num(d[0]) << ","
             << num(d[1]) << "," << num(d[2]);
  out.require(tr.summary.steps >= 10000, "fewer than 1e4 steps");
  for (double v : d) out.require(v <= 1e-12, "periodic drift above 1e-12");

  const Trajectory& mx = trajectory(scenario_mixed_stability());
  out.require(!mx.aborted, "mixed run aborted");
  const auto m = conservation_drifts(mx.records);
  out.detail << "; mixed drift(mass,chi)=" << num(m[0]) << "," << num(m[2]);
  out.require(m[0] <= 1e-12 && m[2] <= 1e-12, "mixed drift above 1e-12");
  return out;
}

Outcome energy() {
  Outcome out;
  const Trajectory& tr = trajectory(scenario_stable_decay());
  const double inc = max_energy_increase(tr.records);
  out.detail << "max step increase=" << num(inc);
  out.require(inc <= 1e-10, "energy increased by more than 1e-10");

  // dt-halving ladder over a fixed early window.
  std::vector<double> violations;
  for (double dt : {2e-3, 1e-3, 5e-4, 2.5e-4}) {
    Scenario sc = scenario_stable_decay();
    sc.name = "stable_ladder_" + num(dt);
    sc.controls.dt_max = dt;
    sc.t_end = 0.2;
    const Trajectory& t = trajectory(sc);
    violations.push_back(std::max(0.0, max_energy_increase(t.records)));
  }
  out.detail << "; ladder violations=";
  for (double v : violations) out.detail << num(v) << " ";
  for (std::size_t i = 1; i < violations.size(); ++i) {
    if (violations[i] > 0.0) out.require(violations[i - 1] >= 2.0 * violations[i], "violation did not halve with dt");
  }
  return out;
}

Outcome fixed_point() {
  Outcome out;
  oracle::Rng rng(20240601);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Boundary bc = trial % 2 ? Boundary::Mixed : Boundary::Periodic;
    const Grid g(1.0, 128, bc);
    const int n = g.cells();
    const State s{Field(n, rng.uniform(0.5, 2.0)), Field(n, 0.0), Field(n, rng.uniform(-1.0, 1.0)), 0.0};
    StepControls c;
    c.dt = 1e-3;
    const State next = step(s, Params{}, g, c).state;
    for (int j = 0; j < n; ++j) {
      worst = std::max({worst, std::abs(next.rho[j] - s.rho[j]), std::abs(next.u[j] - s.u[j]),
                        std::abs(next.chi[j] - s.chi[j])});
    }
  }
  out.detail << "20 constant states, max change=" << num(worst);
  out.require(worst <= 1e-13, "constant state moved");
  return out;
}

Outcome dispersion() {
  Outcome out;
  for (double chi_bar : {0.0, 0.8}) {
    for (int wave : {1, 2, 3}) {
      const DispersionResult r = measure_dispersion({chi_bar, wave, 512, 1e-6});
      const double rel = std::abs(r.measured - r.predicted) / std::abs(r.predicted);
      out.detail << "chi=" << chi_bar << ",n=" << wave << ":" << num(rel) << " ";
      out.require(rel <= 0.05, "rate off by more than 5%");
    }
  }
  return out;
}

Outcome dichotomy() {
  Outcome out;
  const Scenario st = scenario_stable_decay();
  const ScenarioReport rs = evaluate_stable(st, trajectory(st), false);
  const Scenario sp = scenario_spinodal();
  const ScenarioReport rp = evaluate_spinodal(sp, trajectory(sp));
  for (const char* n : {"sup_rho_ratio", "sup_u_ratio", "sup_chi_ratio", "sup_chi_decay_rate"}) {
    const Check* c = find_check(rs, n);
    if (c) out.detail << n << "=" << num(c->measured) << " ";
    out.require(c && c->status == CheckStatus::Pass, std::string("stable ") + n);
  }
  for (const char* n : {"chi_min_final", "chi_max_final", "bimodal_final"}) {
    const Check* c = find_check(rp, n);
    if (c) out.detail << n << "=" << num(c->measured) << " ";
    out.require(c && c->status == CheckStatus::Pass, std::string("spinodal ") + n);
  }
  return out;
}

Outcome lambda_limit() {
  Outcome out;
  const SweepResult r = run_lambda_sweep(scenario_lambda_sweep());
  out.detail << "excursions=";
  for (std::size_t i = 0; i < r.lambdas.size(); ++i) out.detail << num(r.excursions[i]) << " ";
  report_checks(out, r.report);
  return out;
}

Outcome kanel() {
  Outcome out;
  for (const Scenario& sc : {scenario_stable_decay(), scenario_mixed_stability(), scenario_spinodal()}) {
    const ScenarioReport r = sc.name == "spinodal" ? evaluate_spinodal(sc, trajectory(sc))
                                                   : evaluate_stable(sc, trajectory(sc), sc.bc == Boundary::Mixed);
    for (const char* n : {"psi_max_abs", "rho_min", "rho_min_in_psi_bracket", "rho_max_in_psi_bracket"}) {
      const Check* c = find_check(r, n);
      out.require(c && c->status == CheckStatus::Pass, sc.name + "." + n);
    }
    out.detail << sc.name << " psi=" << num(find_check(r, "psi_max_abs")->measured) << " ";
  }
  double worst_g = 0.0, worst_psi = 0.0;
  for (double gamma : {1.0, 1.4, 2.0, 3.0}) {
    for (int i = 0; i <= 12; ++i) {
      const double rho = 0.1 * std::pow(100.0, i / 12.0);
      if (std::abs(rho - 1.0) < 1e-12) continue;
      const double g = oracle::g_integral(rho, 1.0, 1.0, gamma);
      worst_g = std::max(worst_g, std::abs(g_function(rho, 1.0, 1.0, gamma) - g) / g);
      const double psi = gamma == 2.0 ? oracle::psi_gamma2(rho, 1.0, 1.0) : oracle::psi_integral(rho, 1.0, 1.0, gamma);
      worst_psi = std::max(worst_psi, std::abs(kanel_psi(rho, 1.0, 1.0, gamma) - psi) / std::abs(psi));
    }
  }
  out.detail << "G rel err=" << num(worst_g) << " Psi rel err=" << num(worst_psi);
  out.require(worst_g <= 1e-8, "G cross-check");
  out.require(worst_psi <= 1e-8, "Psi cross-check");
  return out;
}

Outcome potential_suite() {
  Outcome out;
  double jump = 0.0, beta_gap = 0.0, below = 0.0;
  double min_order = std::numeric_limits<double>::infinity();
  for (double lambda : {0.5, 0.1, 0.01, 1e-3}) {
    const PotentialModel m{lambda, 0.1};
    const double lip = 1.0 / (lambda * lambda) + 6.0 * (1 + lambda) * (1 + lambda) + 10.0;
    for (double k : {-1 - lambda, -1.0, 1.0, 1 + lambda}) {
      const double lo = std::nextafter(k, -10.0), hi = std::nextafter(k, 10.0);
      const double slack = lip * (hi - lo);
      jump = std::max({jump, std::abs(f_lambda(hi, m) - f_lambda(lo, m)) - slack,
                       std::abs(df_lambda(hi, m) - df_lambda(lo, m)) - slack,
                       std::abs(d2f_lambda(hi, m) - d2f_lambda(lo, m)) - slack});
    }
    for (int i = 0; i <= 60000; ++i) {
      const double chi = -3.0 + 6.0 * i / 60000;
      beta_gap = std::max(beta_gap, std::abs(beta(chi) - beta_lambda(chi, m)) - 0.5 * lambda);
      below = std::max(below, 0.25 * (chi * chi - 1) * (chi * chi - 1) - f_lambda(chi, m));
    }
  }
  for (double chi : {-2.3, -1.7, -0.6, 0.3, 0.9, 1.6, 2.4}) {
    const PotentialModel m{0.2, 0.1};
    auto err = [&](double h) {
      return std::abs((f_lambda(chi + h, m) - f_lambda(chi - h, m)) / (2 * h) - df_lambda(chi, m)) +
             std::abs((df_lambda(chi + h, m) - df_lambda(chi - h, m)) / (2 * h) - d2f_lambda(chi, m));
    };
    const double e1 = err(1e-2), e2 = err(5e-3);
    if (e1 > 1e-9) min_order = std::min(min_order, std::log2(e1 / e2));
  }
  out.detail << "knot jump excess=" << num(std::max(jump, 0.0)) << " beta_gap excess=" << num(beta_gap)
             << " quartic excess=" << num(below) << " fd order=" << num(min_order);
  out.require(jump <= 1e-12, "discontinuity at a knot");
  out.require(beta_gap <= 1e-15, "|beta - beta_lambda| > lambda/2");
  out.require(below <= 0.0, "f_lambda below the quartic");
  out.require(min_order >= 1.8, "finite-difference order");
  return out;
}

Outcome convergence() {
  Outcome out;
  for (Boundary bc : {Boundary::Periodic, Boundary::Mixed}) {
    const ConvergenceResult r = run_convergence(scenario_convergence(bc));
    out.detail << (bc == Boundary::Periodic ? "periodic" : "mixed") << " orders=";
    for (double o : r.orders) out.detail << num(o) << " ";
    report_checks(out, r.report);
  }
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ull;
  return h;
}

std::string csv_outputs(const Scenario& sc) {
  const Trajectory tr = simulate(sc);
  std::ostringstream out;
  write_timeseries(tr.records, out);
  write_snapshot(tr.final_state, sc.params, sc.grid(), out);
  return out.str();
}

Outcome determinism() {
  Outcome out;
  for (const Scenario& sc : {scenario_spinodal(), scenario_stable_decay(), scenario_mixed_stability()}) {
    const std::uint64_t a = fnv1a(csv_outputs(sc)), b = fnv1a(csv_outputs(sc));
    out.detail << sc.name << "=" << std::hex << a << std::dec << " ";
    out.require(a == b, sc.name + " hashes differ");
  }
  return out;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "conservation", conservation},    {2, "energy_dissipation", energy},
      {3, "fixed_point", fixed_point},      {4, "dispersion", dispersion},
      {5, "stable_unstable", dichotomy},    {6, "chi_bound_lambda_limit", lambda_limit},
      {7, "kanel_certificate", kanel},      {8, "potential_suite", potential_suite},
      {9, "convergence_ladder", convergence}, {10, "determinism", determinism},
  };

  bool all = true;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << c.id << " " << c.name << ": " << (o.pass ? "PASS" : "FAIL") << " ("
              << num(secs) << " s) " << o.detail.str() << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
