#pragma once

#include <stdexcept>
#include <string>

namespace nsch {

/// Invalid grid, parameter, initial-condition or file configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Density fell below the vacuum guard.
class VacuumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Picard loop did not reach its tolerance within the iteration budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double last_change)
      : std::runtime_error(what), iterations_(iterations), last_change_(last_change) {}
  int iterations() const { return iterations_; }
  double last_change() const { return last_change_; }

 private:
  int iterations_;
  double last_change_;
};

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. rho <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace nsch
