#pragma once

#include <span>
#include <vector>

namespace nsch {

enum class Boundary { Periodic, Mixed };

/// Boundary closure used by diff() on a Mixed grid. Ignored on periodic grids.
enum class FieldKind {
  NeumannLike,    // even reflection: zero slope at the walls (chi, mu)
  DirichletZero,  // odd reflection: zero value at the walls (u)
  NoBC            // one-sided stencils (rho)
};

/// Cell values at centers x_j = (j + 1/2) h.
using Field = std::vector<double>;

/// Uniform cell-centered mesh on [0, L].
class Grid {
 public:
  static constexpr int kMinCells = 8;

  Grid(double length, int cells, Boundary bc);

  double length() const { return length_; }
  int cells() const { return cells_; }
  double spacing() const { return spacing_; }
  Boundary bc() const { return bc_; }
  bool periodic() const { return bc_ == Boundary::Periodic; }

  double center(int j) const { return (j + 0.5) * spacing_; }
  std::vector<double> centers() const;

  /// Value of `f` at index j in [-2, N+1], extended by the closure for `kind`.
  /// NoBC fields are extended by even reflection; callers needing one-sided
  /// behaviour go through diff().
  double ghost(std::span<const double> f, int j, FieldKind kind) const;

 private:
  double length_;
  int cells_;
  double spacing_;
  Boundary bc_;
};

/// Throws ConfigError for L <= 0 or N < 8.
Grid build_grid(double length, int cells, Boundary bc);

/// Second-order finite difference of order 1..4.
Field diff(std::span<const double> f, int order, const Grid& grid, FieldKind kind);

/// Midpoint rule h * sum(f).
double integrate(std::span<const double> f, const Grid& grid);

/// Fornberg weights for the `order`-th derivative at `x0` from the nodes `x`.
std::vector<double> fd_weights(double x0, std::span<const double> x, int order);

}  // namespace nsch
