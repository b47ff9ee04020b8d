#pragma once

#include <span>
#include <vector>

namespace nsch {

/// Square band matrix with half-bandwidth p (1 = tridiagonal, 2 = pentadiagonal).
/// When `cyclic` is set, column indices wrap modulo n, giving the corner
/// entries of a periodic operator.
class BandedSystem {
 public:
  BandedSystem(int n, int half_bandwidth, bool cyclic);

  static BandedSystem identity(int n, bool cyclic);
  static BandedSystem diagonal(std::span<const double> d, bool cyclic);

  int size() const { return n_; }
  int half_bandwidth() const { return p_; }
  bool cyclic() const { return cyclic_; }

  /// Entry in row `row` at column row + offset (wrapped if cyclic).
  double& at(int row, int offset) { return data_[index(row, offset)]; }
  double at(int row, int offset) const { return data_[index(row, offset)]; }

  /// True when column row + offset exists (always true for cyclic systems).
  bool in_range(int row, int offset) const;

  std::vector<double> apply(std::span<const double> x) const;
  double max_norm() const;

  /// this * diag(d)
  BandedSystem scale_columns(std::span<const double> d) const;
  BandedSystem widened(int half_bandwidth) const;

  BandedSystem& operator+=(const BandedSystem& other);
  BandedSystem& operator*=(double s);

  friend BandedSystem operator*(const BandedSystem& a, const BandedSystem& b);

 private:
  std::size_t index(int row, int offset) const {
    return static_cast<std::size_t>(offset + p_) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(row);
  }

  int n_;
  int p_;
  bool cyclic_;
  std::vector<double> data_;
};

/// Solves A x = rhs. Non-cyclic systems use banded LU without pivoting
/// (the assembled operators are positive definite); cyclic systems apply a
/// Woodbury rank-2p correction to the factorization of the uncoupled band.
/// Throws SingularMatrixError on a zero pivot or when the residual exceeds
/// 1e-10 * |A| * |x| in max norm.
std::vector<double> solve_banded(const BandedSystem& system, std::span<const double> rhs);

}  // namespace nsch
