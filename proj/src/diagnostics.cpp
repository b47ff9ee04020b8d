#include "nsch/diagnostics.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nsch/errors.hpp"
#include "nsch/potential.hpp"

namespace nsch {

namespace {

// (1 + x)^gamma - 1 - gamma x, and (1 + x) log(1 + x) - x for gamma = 1,
// without the O(x) cancellation near x = 0.
double relative_excess(double x, double gamma) {
  if (std::abs(x) < 1e-3) {
    double acc = 0.0;
    double power = x;
    double binom = gamma;  // binomial(gamma, k), built incrementally
    for (int k = 2; k <= 8; ++k) {
      power *= x;
      binom *= (gamma - (k - 1)) / k;
      acc += gamma == 1.0 ? (k % 2 == 0 ? 1.0 : -1.0) * power / (k * (k - 1.0)) : binom * power;
    }
    return acc;
  }
  if (gamma == 1.0) return (1.0 + x) * std::log1p(x) - x;
  return std::expm1(gamma * std::log1p(x)) - gamma * x;
}

}  // namespace

double g_function(double rho, double rho_bar, double a, double gamma) {
  if (!(rho > 0.0) || !(rho_bar > 0.0)) {
    throw DomainError("g_function: densities must be positive");
  }
  // gamma = 1: a (rho ln rho - rho (ln rho_bar + 1) + rho_bar)
  // gamma > 1: a (rho^gamma / (gamma-1) - gamma rho_bar^(gamma-1) rho / (gamma-1) + rho_bar^gamma)
  // Both are rho_bar^gamma times a function of x = rho / rho_bar - 1.
  const double x = rho / rho_bar - 1.0;
  const double excess = std::max(relative_excess(x, gamma), 0.0);
  if (gamma == 1.0) return a * rho_bar * excess;
  return a * std::pow(rho_bar, gamma) * excess / (gamma - 1.0);
}

double kanel_psi(double rho, double rho_bar, double a, double gamma) {
  if (!(rho > 0.0) || !(rho_bar > 0.0)) {
    throw DomainError("kanel_psi: densities must be positive");
  }
  if (rho == rho_bar) return 0.0;
  // s = exp(t): ds / s^{3/2} = exp(-t/2) dt, smooth over many decades.
  auto integrand = [&](double t) {
    const double s = std::exp(t);
    return std::sqrt(g_function(s, rho_bar, a, gamma)) * std::exp(-0.5 * t);
  };
  const double lo = std::log(rho_bar);
  const double hi = std::log(rho);
  if (std::abs(hi - lo) < 0.1) {
    // integrand ~ |t - lo| * smooth here; adaptive refinement only chases roundoff
    return boost::math::quadrature::gauss<double, 30>::integrate(integrand, lo, hi);
  }
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, lo, hi, 15,
                                                                        1e-12, &error);
}

double kanel_psi_inverse(double psi, double rho_bar, double a, double gamma) {
  if (psi == 0.0) return rho_bar;
  double lo = rho_bar, hi = rho_bar;
  if (psi > 0.0) {
    while (kanel_psi(hi, rho_bar, a, gamma) < psi) hi *= 2.0;
  } else {
    while (kanel_psi(lo, rho_bar, a, gamma) > psi) lo *= 0.5;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kanel_psi(mid, rho_bar, a, gamma) < psi ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// eps/2 * h * sum over interior faces of ((chi_{j+1} - chi_j)/h)^2
double gradient_energy(const State& s, const Params& p, const Grid& g) {
  const int n = g.cells();
  const double h = g.spacing();
  double acc = 0.0;
  for (int j = 0; j + 1 < n; ++j) {
    const double d = (s.chi[j + 1] - s.chi[j]) / h;
    acc += d * d;
  }
  if (g.periodic()) {
    const double d = (s.chi[0] - s.chi[n - 1]) / h;
    acc += d * d;
  }
  return 0.5 * p.epsilon * h * acc;
}

template <class Bulk>
double energy_with(const State& s, const Params& p, const Grid& g, const Averages& avgs,
                   Bulk bulk) {
  const int n = g.cells();
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double rho = s.rho[j];
    acc += 0.5 * rho * s.u[j] * s.u[j] + g_function(rho, avgs.rho_bar, p.a, p.gamma) +
           rho * bulk(s.chi[j]) / p.epsilon;
  }
  return g.spacing() * acc + gradient_energy(s, p, g);
}

}  // namespace

double total_energy(const State& s, const Params& p, const Grid& g, const Averages& avgs) {
  const auto model = p.potential();
  return energy_with(s, p, g, avgs, [&](double chi) { return f_lambda(chi, model); });
}

double quartic_energy(const State& s, const Params& p, const Grid& g, const Averages& avgs) {
  return energy_with(s, p, g, avgs, [](double chi) {
    const double w = chi * chi - 1.0;
    return 0.25 * w * w;
  });
}

double modified_energy(const State& s, const Params& p, const Grid& g, const Averages& avgs) {
  const int n = g.cells();
  Field inv(n);
  for (int j = 0; j < n; ++j) inv[j] = 1.0 / s.rho[j];
  const Field inv_x = diff(inv, 1, g, FieldKind::NoBC);
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double rho = s.rho[j];
    acc += 0.25 * p.nu * p.nu * rho * inv_x[j] * inv_x[j] -
           0.5 * p.nu * rho * s.u[j] * inv_x[j] + rho * s.chi[j] * s.chi[j];
  }
  return total_energy(s, p, g, avgs) + g.spacing() * acc;
}

DiagnosticsRecord record(const State& s, const Params& p, const Grid& g, const Averages& avgs,
                         int picard_iters) {
  DiagnosticsRecord r;
  const int n = g.cells();
  r.time = s.time;
  Field m(n), q(n);
  for (int j = 0; j < n; ++j) {
    m[j] = s.rho[j] * s.u[j];
    q[j] = s.rho[j] * s.chi[j];
    r.sup_rho = std::max(r.sup_rho, std::abs(s.rho[j] - avgs.rho_bar));
    r.sup_u = std::max(r.sup_u, std::abs(s.u[j] - avgs.u_bar));
    r.sup_chi = std::max(r.sup_chi, std::abs(s.chi[j] - avgs.chi_bar));
  }
  r.mass = integrate(s.rho, g);
  r.momentum = integrate(m, g);
  r.chi_mass = integrate(q, g);
  r.energy = total_energy(s, p, g, avgs);
  const auto [cmin, cmax] = std::ranges::minmax(s.chi);
  const auto [rmin, rmax] = std::ranges::minmax(s.rho);
  r.chi_min = cmin;
  r.chi_max = cmax;
  r.rho_min = rmin;
  r.rho_max = rmax;
  // Psi is increasing, so its range over the field is attained at rho_min/rho_max.
  r.psi_min = kanel_psi(rmin, avgs.rho_bar, p.a, p.gamma);
  r.psi_max = kanel_psi(rmax, avgs.rho_bar, p.a, p.gamma);
  r.picard_iters = picard_iters;
  return r;
}

Averages asymptotic_state(const State& state, const Grid& grid) {
  Averages a = averages(state, grid);
  if (!grid.periodic()) a.u_bar = 0.0;
  return a;
}

double decay_rate(std::span<const std::pair<double, double>> series) {
  if (series.size() < 5) throw std::invalid_argument("decay_rate: need at least 5 samples");
  for (const auto& [t, v] : series) {
    if (!(v > 0.0)) throw std::invalid_argument("decay_rate: values must be positive");
  }
  const bool constant = std::ranges::all_of(
      series, [&](const auto& sample) { return sample.second == series.front().second; });
  if (constant) throw std::invalid_argument("decay_rate: degenerate fit, all values equal");

  const std::size_t first = series.size() / 2;
  const auto tail = series.subspan(first);
  const double count = static_cast<double>(tail.size());
  double st = 0.0, sy = 0.0;
  for (const auto& [t, v] : tail) {
    st += t;
    sy += std::log(v);
  }
  const double tm = st / count, ym = sy / count;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [t, v] : tail) {
    sxx += (t - tm) * (t - tm);
    sxy += (t - tm) * (std::log(v) - ym);
  }
  if (sxx == 0.0) throw std::invalid_argument("decay_rate: degenerate fit, times coincide");
  return sxy / sxx;
}

void Recorder::operator()(const State& state, const StepInfo& info) {
  if (!have_avgs_) {
    avgs_ = asymptotic_state(state, grid_);
    have_avgs_ = true;
  }
  records_.push_back(record(state, params_, grid_, avgs_, info.picard_iters));
}

Sink Recorder::sink() {
  return [this](const State& s, const StepInfo& info) { (*this)(s, info); };
}

}  // namespace nsch
