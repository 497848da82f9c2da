#pragma once

// Shared helpers for the test binaries: random matrices and independent
// numerical oracles.

#include <cmath>
#include <functional>
#include <vector>

#include "dagma/matrix.hpp"
#include "dagma/rng.hpp"

namespace dagma::test {

inline Matrix gaussian_matrix(Rng& rng, Index rows, Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

/// Gaussian W with zero diagonal rescaled so that rho(W∘W) = target.
inline Matrix scaled_into_domain(Rng& rng, Index d, double target) {
  Matrix w = gaussian_matrix(rng, d, d);
  w.diagonal().setZero();
  const double rho = spectral_radius_nonneg(w.cwiseAbs2(), 1e-12, 200000).value;
  if (rho > 0.0) w *= std::sqrt(target / rho);
  return w;
}

/// Determinant by Laplace expansion along the first row (d <= 8).
inline long double cofactor_det(const Matrix& a) {
  const Index n = a.rows();
  if (n == 1) return a(0, 0);
  long double total = 0.0L;
  for (Index c = 0; c < n; ++c) {
    if (a(0, c) == 0.0) continue;
    Matrix minor(n - 1, n - 1);
    for (Index i = 1; i < n; ++i)
      for (Index j = 0, k = 0; j < n; ++j)
        if (j != c) minor(i - 1, k++) = a(i, j);
    const long double sign = (c % 2 == 0) ? 1.0L : -1.0L;
    total += sign * a(0, c) * cofactor_det(minor);
  }
  return total;
}

/// Central differences of a scalar function of a matrix.
inline Matrix fd_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x,
                          double h = 1e-6) {
  Matrix g(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) {
      Matrix p = x, m = x;
      p(i, j) += h;
      m(i, j) -= h;
      g(i, j) = (f(p) - f(m)) / (2.0 * h);
    }
  return g;
}

inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-6) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector p = x, m = x;
    p[i] += h;
    m[i] -= h;
    g[i] = (f(p) - f(m)) / (2.0 * h);
  }
  return g;
}

/// max |a - b| / max(1, max |b|).
inline double rel_error(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

inline double rel_error(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

/// Any directed cycle, by checking Tr(A^k) > 0 for k = 1..d on the pattern.
inline bool has_cycle_by_trace(const Adjacency& b) {
  const Index d = b.rows();
  const Matrix a = b.cast<double>();
  Matrix p = a;
  for (Index k = 1; k <= d; ++k) {
    if (p.trace() > 0.5) return true;
    p = (p * a).unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
  }
  return false;
}

/// sum_{k=1..d} Tr((W∘W)^k): zero iff the weighted graph has no cycle.
inline double weighted_cycle_mass(const Matrix& w) {
  const Matrix a = w.cwiseAbs2();
  Matrix p = a;
  double total = 0.0;
  for (Index k = 1; k <= a.rows(); ++k) {
    total += p.trace();
    p = p * a;
  }
  return total;
}

/// Unit-weight cycle 0 -> 1 -> ... -> d-1 -> 0.
inline Matrix cycle_matrix(Index d, double weight = 1.0) {
  Matrix c = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) c(i, (i + 1) % d) = weight;
  return c;
}

}  // namespace dagma::test
