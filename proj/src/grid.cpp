#include "nsch/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nsch/errors.hpp"

namespace nsch {

Grid::Grid(double length, int cells, Boundary bc)
    : length_(length), cells_(cells), spacing_(length / cells), bc_(bc) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw ConfigError("grid length must be positive, got " + std::to_string(length));
  }
  if (cells < kMinCells) {
    throw ConfigError("grid needs at least 8 cells, got " + std::to_string(cells));
  }
}

std::vector<double> Grid::centers() const {
  std::vector<double> x(cells_);
  for (int j = 0; j < cells_; ++j) x[j] = center(j);
  return x;
}

double Grid::ghost(std::span<const double> f, int j, FieldKind kind) const {
  const int n = cells_;
  if (j >= 0 && j < n) return f[j];
  if (bc_ == Boundary::Periodic) return f[((j % n) + n) % n];
  const int mirror = j < 0 ? -1 - j : 2 * n - 1 - j;
  return kind == FieldKind::DirichletZero ? -f[mirror] : f[mirror];
}

Grid build_grid(double length, int cells, Boundary bc) { return Grid(length, cells, bc); }

std::vector<double> fd_weights(double x0, std::span<const double> x, int order) {
  // Fornberg (1988), single evaluation point.
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][order];
  return w;
}

namespace {

double centered(const Grid& g, std::span<const double> f, int j, int order, FieldKind kind) {
  const double h = g.spacing();
  auto at = [&](int k) { return g.ghost(f, j + k, kind); };
  switch (order) {
    case 1:
      return (at(1) - at(-1)) / (2.0 * h);
    case 2:
      return ((at(1) + at(-1)) - 2.0 * at(0)) / (h * h);
    case 3:
      return ((at(2) - at(-2)) - 2.0 * (at(1) - at(-1))) / (2.0 * h * h * h);
    default:
      return ((at(2) + at(-2)) - 4.0 * (at(1) + at(-1)) + 6.0 * at(0)) / (h * h * h * h);
  }
}

// One-sided second-order stencil of order+2 points lying inside the domain.
double one_sided(const Grid& g, std::span<const double> f, int j, int order) {
  const int n = g.cells();
  const int width = order + 2;
  int first = j - width / 2;
  first = std::clamp(first, 0, n - width);
  std::vector<double> nodes(width);
  for (int i = 0; i < width; ++i) nodes[i] = static_cast<double>(first + i - j);
  const auto w = fd_weights(0.0, nodes, order);
  double acc = 0.0;
  for (int i = 0; i < width; ++i) acc += w[i] * f[first + i];
  return acc / std::pow(g.spacing(), order);
}

}  // namespace

Field diff(std::span<const double> f, int order, const Grid& grid, FieldKind kind) {
  const int n = grid.cells();
  if (static_cast<int>(f.size()) != n) {
    throw ConfigError("diff: field length " + std::to_string(f.size()) +
                      " does not match grid with " + std::to_string(n) + " cells");
  }
  if (order < 1 || order > 4) throw ConfigError("diff: order must be 1..4");
  Field out(n);
  const int reach = order <= 2 ? 1 : 2;
  const bool one_sided_edges = !grid.periodic() && kind == FieldKind::NoBC;
  for (int j = 0; j < n; ++j) {
    const bool near_wall = j < reach || j >= n - reach;
    out[j] = (one_sided_edges && near_wall) ? one_sided(grid, f, j, order)
                                            : centered(grid, f, j, order, kind);
  }
  return out;
}

double integrate(std::span<const double> f, const Grid& grid) {
  return grid.spacing() * std::accumulate(f.begin(), f.end(), 0.0);
}

}  // namespace nsch
