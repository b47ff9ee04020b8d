#pragma once

namespace nsch {

/// C^2 regularization of the obstacle double well: the quartic 1/4 (chi^2 - 1)^2
/// on [-1, 1], a cubic transition on 1 < |chi| < 1 + lambda, and a quadratic
/// penalty of stiffness 1/lambda beyond.
struct PotentialModel {
  double lambda = 1e-3;
  double epsilon = 0.1;

  /// Throws ConfigError unless 0 < lambda < 1 and epsilon > 0.
  void validate() const;
};

double f_lambda(double chi, const PotentialModel& model);
double df_lambda(double chi, const PotentialModel& model);
double d2f_lambda(double chi, const PotentialModel& model);

/// lambda * (chi - chi^3 + f_lambda'(chi)): zero on [-1, 1].
double beta_lambda(double chi, const PotentialModel& model);
double dbeta_lambda(double chi, const PotentialModel& model);

/// Pointwise lambda -> 0 limit of beta_lambda.
double beta(double chi);

enum class StabilityClass { Stable, Unstable, Boundary };

inline constexpr double kClassifyTolerance = 1e-9;

/// Sign of 3 chi_bar^2 - 1 with a dead band of width `tol`.
StabilityClass classify_mean(double chi_bar, double tol = kClassifyTolerance);

const char* to_string(StabilityClass c);

}  // namespace nsch
