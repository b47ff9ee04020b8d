#include "nsch/state.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nsch/errors.hpp"

namespace nsch {

void Params::validate() const {
  if (!(nu > 0.0)) throw ConfigError("nu must be > 0");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (!(a > 0.0)) throw ConfigError("a must be > 0");
  if (!(gamma >= 1.0)) throw ConfigError("gamma must be ≥ 1");
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda must lie in (0, 1)");
}

double Params::pressure(double rho) const { return a * std::pow(rho, gamma); }

double Params::sound_speed(double rho) const {
  return std::sqrt(a * gamma * std::pow(rho, gamma - 1.0));
}

Averages averages(const State& s, const Grid& g) {
  const double mass = integrate(s.rho, g);
  if (!(mass > 0.0)) throw VacuumError("averages: total mass is not positive");
  const int n = g.cells();
  Field m(n), q(n);
  for (int j = 0; j < n; ++j) {
    m[j] = s.rho[j] * s.u[j];
    q[j] = s.rho[j] * s.chi[j];
  }
  return {mass / g.length(), integrate(m, g) / mass, integrate(q, g) / mass};
}

namespace {

double mode_shape(const Grid& g, const Mode& mode, double x) {
  using std::numbers::pi;
  if (g.periodic()) return std::cos(2.0 * pi * mode.wave * x / g.length() + mode.phase);
  const double arg = pi * mode.wave * x / g.length();
  switch (mode.field) {
    case FieldId::U:
      return std::sin(arg);
    case FieldId::Chi:
      return std::cos(arg);
    default:
      return std::cos(arg + mode.phase);
  }
}

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

State uniform_state(const Grid& g, const ConstantIC& c) {
  const auto n = static_cast<std::size_t>(g.cells());
  return State{Field(n, c.rho), Field(n, c.u), Field(n, c.chi), 0.0};
}

void check_admissible(const State& s) {
  for (std::size_t j = 0; j < s.rho.size(); ++j) {
    if (!std::isfinite(s.rho[j]) || !std::isfinite(s.u[j]) || !std::isfinite(s.chi[j])) {
      throw ConfigError("initial condition produces non-finite values");
    }
    if (!(s.rho[j] > 0.0)) throw ConfigError("initial density must be positive everywhere");
    if (s.chi[j] < -1.0 || s.chi[j] > 1.0) {
      throw ConfigError("initial concentration must lie in [-1, 1]");
    }
  }
}

}  // namespace

State make_initial(const Grid& g, const InitialCondition& ic) {
  State s;
  if (const auto* c = std::get_if<ConstantIC>(&ic)) {
    s = uniform_state(g, *c);
  } else if (const auto* p = std::get_if<PerturbedIC>(&ic)) {
    s = uniform_state(g, p->base);
    for (const Mode& mode : p->modes) {
      if (mode.wave < 1) throw ConfigError("perturbation mode index must be >= 1");
      Field& f = mode.field == FieldId::Rho ? s.rho : (mode.field == FieldId::U ? s.u : s.chi);
      for (int j = 0; j < g.cells(); ++j) f[j] += mode.amplitude * mode_shape(g, mode, g.center(j));
    }
  } else {
    const auto& noise = std::get<NoiseIC>(ic);
    s = uniform_state(g, noise.base);
    std::mt19937_64 rng(noise.seed);
    const int max_wave = g.cells() / 4;
    Field pert(g.cells(), 0.0);
    for (int k = 1; k <= max_wave; ++k) {
      const double amp = 2.0 * unit_uniform(rng) - 1.0;
      const double phase = 2.0 * std::numbers::pi * unit_uniform(rng);
      const Mode mode{FieldId::Chi, k, amp, phase};
      for (int j = 0; j < g.cells(); ++j) pert[j] += amp * mode_shape(g, mode, g.center(j));
    }
    const double sup = std::ranges::max(pert, {}, [](double v) { return std::abs(v); });
    const double scale = std::abs(sup) > 0.0 ? noise.amplitude / std::abs(sup) : 0.0;
    for (int j = 0; j < g.cells(); ++j) s.chi[j] += scale * pert[j];
  }
  check_admissible(s);
  return s;
}

std::string ValidationReport::describe() const {
  std::ostringstream os;
  os << "rho in [" << rho_min << ", " << rho_max << "], chi in [" << chi_min << ", " << chi_max
     << "]";
  if (non_finite) os << "; non-finite values";
  if (vacuum) os << "; vacuum";
  if (chi_out_of_bounds) os << "; chi outside admissible band";
  return os.str();
}

ValidationReport validate(const State& s, double rho_floor, double lambda, double chi_slack) {
  ValidationReport r;
  if (s.rho.empty()) {
    r.vacuum = true;
    return r;
  }
  auto [rmin, rmax] = std::ranges::minmax(s.rho);
  auto [cmin, cmax] = std::ranges::minmax(s.chi);
  r.rho_min = rmin;
  r.rho_max = rmax;
  r.chi_min = cmin;
  r.chi_max = cmax;
  auto finite = [](double v) { return std::isfinite(v); };
  r.non_finite = !std::ranges::all_of(s.rho, finite) || !std::ranges::all_of(s.u, finite) ||
                 !std::ranges::all_of(s.chi, finite);
  r.vacuum = !(rmin >= rho_floor);
  const double bound = 1.0 + lambda + chi_slack;
  r.chi_out_of_bounds = cmax > bound || cmin < -bound;
  return r;
}

}  // namespace nsch
