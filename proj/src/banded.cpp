#include "nsch/banded.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsch/errors.hpp"

namespace nsch {

BandedSystem::BandedSystem(int n, int half_bandwidth, bool cyclic)
    : n_(n), p_(half_bandwidth), cyclic_(cyclic),
      data_(static_cast<std::size_t>(2 * half_bandwidth + 1) * static_cast<std::size_t>(n), 0.0) {
  if (cyclic && n < 2 * half_bandwidth + 1) {
    throw SingularMatrixError("cyclic band wider than the matrix");
  }
}

BandedSystem BandedSystem::identity(int n, bool cyclic) {
  BandedSystem m(n, 0, cyclic);
  for (int i = 0; i < n; ++i) m.at(i, 0) = 1.0;
  return m;
}

BandedSystem BandedSystem::diagonal(std::span<const double> d, bool cyclic) {
  BandedSystem m(static_cast<int>(d.size()), 0, cyclic);
  for (int i = 0; i < m.n_; ++i) m.at(i, 0) = d[i];
  return m;
}

bool BandedSystem::in_range(int row, int offset) const {
  if (cyclic_) return true;
  const int col = row + offset;
  return col >= 0 && col < n_;
}

std::vector<double> BandedSystem::apply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (int d = -p_; d <= p_; ++d) {
      if (!in_range(i, d)) continue;
      const int col = ((i + d) % n_ + n_) % n_;
      acc += at(i, d) * x[col];
    }
    y[i] = acc;
  }
  return y;
}

double BandedSystem::max_norm() const {
  double best = 0.0;
  for (int i = 0; i < n_; ++i) {
    double row = 0.0;
    for (int d = -p_; d <= p_; ++d) row += std::abs(at(i, d));
    best = std::max(best, row);
  }
  return best;
}

BandedSystem BandedSystem::scale_columns(std::span<const double> d) const {
  BandedSystem out = *this;
  for (int i = 0; i < n_; ++i) {
    for (int k = -p_; k <= p_; ++k) {
      if (!in_range(i, k)) continue;
      out.at(i, k) *= d[((i + k) % n_ + n_) % n_];
    }
  }
  return out;
}

BandedSystem BandedSystem::widened(int half_bandwidth) const {
  BandedSystem out(n_, std::max(half_bandwidth, p_), cyclic_);
  for (int i = 0; i < n_; ++i) {
    for (int k = -p_; k <= p_; ++k) out.at(i, k) = at(i, k);
  }
  return out;
}

BandedSystem& BandedSystem::operator+=(const BandedSystem& other) {
  if (other.p_ > p_) *this = widened(other.p_);
  for (int i = 0; i < n_; ++i) {
    for (int k = -other.p_; k <= other.p_; ++k) at(i, k) += other.at(i, k);
  }
  return *this;
}

BandedSystem& BandedSystem::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

BandedSystem operator*(const BandedSystem& a, const BandedSystem& b) {
  const int n = a.n_;
  BandedSystem c(n, a.p_ + b.p_, a.cyclic_);
  for (int i = 0; i < n; ++i) {
    for (int ka = -a.p_; ka <= a.p_; ++ka) {
      if (!a.in_range(i, ka)) continue;
      const double va = a.at(i, ka);
      if (va == 0.0) continue;
      const int m = ((i + ka) % n + n) % n;
      for (int kb = -b.p_; kb <= b.p_; ++kb) {
        if (!b.in_range(m, kb)) continue;
        // Offsets are combined without wrapping so that cyclic products of
        // narrow bands stay unambiguous; n >= 2p + 1 guarantees this.
        c.at(i, ka + kb) += va * b.at(m, kb);
      }
    }
  }
  return c;
}

namespace {

// In-place banded LU (Doolittle, no pivoting) on the non-wrapping part.
class BandLU {
 public:
  explicit BandLU(const BandedSystem& a) : n_(a.size()), p_(a.half_bandwidth()), lu_(a) {
    for (int k = 0; k < n_; ++k) {
      const double pivot = lu_.at(k, 0);
      if (pivot == 0.0 || !std::isfinite(pivot)) {
        throw SingularMatrixError("zero pivot in banded factorization at row " +
                                  std::to_string(k));
      }
      for (int i = k + 1; i <= std::min(k + p_, n_ - 1); ++i) {
        const double l = lu_.at(i, k - i) / pivot;
        lu_.at(i, k - i) = l;
        for (int j = k + 1; j <= std::min(k + p_, n_ - 1); ++j) {
          lu_.at(i, j - i) -= l * lu_.at(k, j - k);
        }
      }
    }
  }

  void solve_in_place(std::span<double> x) const {
    for (int i = 0; i < n_; ++i) {
      double acc = x[i];
      for (int j = std::max(0, i - p_); j < i; ++j) acc -= lu_.at(i, j - i) * x[j];
      x[i] = acc;
    }
    for (int i = n_ - 1; i >= 0; --i) {
      double acc = x[i];
      for (int j = i + 1; j <= std::min(i + p_, n_ - 1); ++j) acc -= lu_.at(i, j - i) * x[j];
      x[i] = acc / lu_.at(i, 0);
    }
  }

 private:
  int n_;
  int p_;
  BandedSystem lu_;
};

// Dense k x k solve with partial pivoting, row-major.
std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b, int k) {
  for (int c = 0; c < k; ++c) {
    int piv = c;
    for (int r = c + 1; r < k; ++r) {
      if (std::abs(a[r * k + c]) > std::abs(a[piv * k + c])) piv = r;
    }
    if (a[piv * k + c] == 0.0) throw SingularMatrixError("singular capacitance matrix");
    if (piv != c) {
      for (int j = 0; j < k; ++j) std::swap(a[c * k + j], a[piv * k + j]);
      std::swap(b[c], b[piv]);
    }
    for (int r = c + 1; r < k; ++r) {
      const double l = a[r * k + c] / a[c * k + c];
      for (int j = c; j < k; ++j) a[r * k + j] -= l * a[c * k + j];
      b[r] -= l * b[c];
    }
  }
  for (int r = k - 1; r >= 0; --r) {
    double acc = b[r];
    for (int j = r + 1; j < k; ++j) acc -= a[r * k + j] * b[j];
    b[r] = acc / a[r * k + r];
  }
  return b;
}

std::vector<double> solve_cyclic(const BandedSystem& a, std::span<const double> rhs) {
  const int n = a.size();
  const int p = a.half_bandwidth();

  // A = B + sum_q e_{r_q} c_q^T, where B keeps only non-wrapping entries.
  BandedSystem band(n, p, false);
  std::vector<int> rows;
  for (int i = 0; i < n; ++i) {
    bool wraps = false;
    for (int d = -p; d <= p; ++d) {
      const int col = i + d;
      if (col >= 0 && col < n) {
        band.at(i, d) = a.at(i, d);
      } else if (a.at(i, d) != 0.0) {
        wraps = true;
      }
    }
    if (wraps) rows.push_back(i);
  }
  const BandLU lu(band);
  std::vector<double> y(rhs.begin(), rhs.end());
  lu.solve_in_place(y);
  const int k = static_cast<int>(rows.size());
  if (k == 0) return y;

  // Z = B^{-1} [e_{r_0} ... e_{r_{k-1}}]
  std::vector<std::vector<double>> z(k, std::vector<double>(n, 0.0));
  for (int q = 0; q < k; ++q) {
    z[q][rows[q]] = 1.0;
    lu.solve_in_place(z[q]);
  }
  auto corner_dot = [&](int q, std::span<const double> v) {
    const int i = rows[q];
    double acc = 0.0;
    for (int d = -p; d <= p; ++d) {
      const int col = i + d;
      if (col < 0 || col >= n) acc += a.at(i, d) * v[((col % n) + n) % n];
    }
    return acc;
  };
  std::vector<double> cap(static_cast<std::size_t>(k * k));
  std::vector<double> cy(k);
  for (int q = 0; q < k; ++q) {
    for (int s = 0; s < k; ++s) cap[q * k + s] = (q == s ? 1.0 : 0.0) + corner_dot(q, z[s]);
    cy[q] = corner_dot(q, y);
  }
  const auto w = dense_solve(std::move(cap), std::move(cy), k);
  for (int s = 0; s < k; ++s) {
    for (int i = 0; i < n; ++i) y[i] -= z[s][i] * w[s];
  }
  return y;
}

}  // namespace

std::vector<double> solve_banded(const BandedSystem& a, std::span<const double> rhs) {
  if (static_cast<int>(rhs.size()) != a.size()) {
    throw SingularMatrixError("right-hand side length does not match the system");
  }
  std::vector<double> x;
  if (a.cyclic()) {
    x = solve_cyclic(a, rhs);
  } else {
    const BandLU lu(a);
    x.assign(rhs.begin(), rhs.end());
    lu.solve_in_place(x);
  }
  const auto ax = a.apply(x);
  double res = 0.0, xmax = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    res = std::max(res, std::abs(ax[i] - rhs[i]));
    xmax = std::max(xmax, std::abs(x[i]));
  }
  if (!std::isfinite(res) || res > 1e-10 * a.max_norm() * xmax) {
    throw SingularMatrixError("banded solve residual " + std::to_string(res) +
                              " exceeds tolerance");
  }
  return x;
}

}  // namespace nsch
