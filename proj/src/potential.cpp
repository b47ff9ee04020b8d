#include "nsch/potential.hpp"

#include <cmath>

#include "nsch/errors.hpp"

namespace nsch {

void PotentialModel::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("lambda must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

namespace {

double quartic(double chi) {
  const double w = chi * chi - 1.0;
  return 0.25 * w * w;
}

}  // namespace

double f_lambda(double chi, const PotentialModel& m) {
  const double l = m.lambda;
  if (chi >= 1.0 + l) {
    const double d = chi - (1.0 + 0.5 * l);
    return d * d / (2.0 * l) + quartic(chi) + l / 24.0;
  }
  if (chi > 1.0) {
    const double d = chi - 1.0;
    return quartic(chi) + d * d * d / (6.0 * l * l);
  }
  if (chi >= -1.0) return quartic(chi);
  if (chi > -1.0 - l) {
    const double d = chi + 1.0;
    return quartic(chi) - d * d * d / (6.0 * l * l);
  }
  const double d = chi + (1.0 + 0.5 * l);
  return d * d / (2.0 * l) + quartic(chi) + l / 24.0;
}

double df_lambda(double chi, const PotentialModel& m) {
  const double l = m.lambda;
  const double base = chi * chi * chi - chi;
  if (chi >= 1.0 + l) return (chi - (1.0 + 0.5 * l)) / l + base;
  if (chi > 1.0) return (chi - 1.0) * (chi - 1.0) / (2.0 * l * l) + base;
  if (chi >= -1.0) return base;
  if (chi > -1.0 - l) return -(chi + 1.0) * (chi + 1.0) / (2.0 * l * l) + base;
  return (chi + (1.0 + 0.5 * l)) / l + base;
}

double d2f_lambda(double chi, const PotentialModel& m) {
  const double l = m.lambda;
  const double base = 3.0 * chi * chi - 1.0;
  if (chi >= 1.0 + l) return 1.0 / l + base;
  if (chi > 1.0) return (chi - 1.0) / (l * l) + base;
  if (chi >= -1.0) return base;
  if (chi > -1.0 - l) return -(chi + 1.0) / (l * l) + base;
  return 1.0 / l + base;
}

double beta_lambda(double chi, const PotentialModel& m) {
  const double l = m.lambda;
  if (chi >= 1.0 + l) return chi - (1.0 + 0.5 * l);
  if (chi > 1.0) return (chi - 1.0) * (chi - 1.0) / (2.0 * l);
  if (chi >= -1.0) return 0.0;
  if (chi > -1.0 - l) return -(chi + 1.0) * (chi + 1.0) / (2.0 * l);
  return chi + (1.0 + 0.5 * l);
}

double dbeta_lambda(double chi, const PotentialModel& m) {
  const double l = m.lambda;
  if (chi >= 1.0 + l || chi <= -1.0 - l) return 1.0;
  if (chi > 1.0) return (chi - 1.0) / l;
  if (chi >= -1.0) return 0.0;
  return -(chi + 1.0) / l;
}

double beta(double chi) {
  if (chi > 1.0) return chi - 1.0;
  if (chi < -1.0) return chi + 1.0;
  return 0.0;
}

StabilityClass classify_mean(double chi_bar, double tol) {
  const double c = 3.0 * chi_bar * chi_bar - 1.0;
  if (c > tol) return StabilityClass::Stable;
  if (c < -tol) return StabilityClass::Unstable;
  return StabilityClass::Boundary;
}

const char* to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::Stable:
      return "Stable";
    case StabilityClass::Unstable:
      return "Unstable";
    default:
      return "Boundary";
  }
}

}  // namespace nsch
