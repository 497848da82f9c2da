#include "dagma/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "dagma/error.hpp"

namespace dagma {

namespace {

constexpr double kSingularPivot = 1e-13;

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::dimension_mismatch,
                std::string(what) + " needs a square matrix, got " + std::to_string(a.rows()) +
                    "x" + std::to_string(a.cols()));
  }
}

bool has_small_pivot(const Eigen::MatrixXd& packed, double scale) {
  const double floor = kSingularPivot * scale;
  for (Index i = 0; i < packed.rows(); ++i) {
    if (!(std::abs(packed(i, i)) >= floor) || packed(i, i) == 0.0) return true;
  }
  return false;
}

double norm1(const Matrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

LuFactorization lu_decompose(const Matrix& a) {
  require_square(a, "lu_decompose");
  const Index n = a.rows();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::MatrixXd& packed = lu.matrixLU();
  if (n > 0 && has_small_pivot(packed, max_abs(a))) {
    throw Error(ErrorCode::singular_matrix, "zero pivot in LU factorization");
  }

  LuFactorization out;
  out.lower = Matrix::Identity(n, n);
  out.lower.triangularView<Eigen::StrictlyLower>() = packed.triangularView<Eigen::StrictlyLower>();
  out.upper = packed.triangularView<Eigen::Upper>();

  // P * A = L * U; Eigen's P maps row i of A to row indices()[i] of P*A.
  const auto& idx = lu.permutationP().indices();
  out.permutation.assign(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) out.permutation[static_cast<std::size_t>(idx[i])] = i;
  out.permutation_sign = static_cast<int>(lu.permutationP().determinant());
  return out;
}

LogDet log_det(const Matrix& a) {
  require_square(a, "log_det");
  const Index n = a.rows();
  if (n == 0) return {1, 0.0};
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::MatrixXd& packed = lu.matrixLU();
  if (has_small_pivot(packed, max_abs(a))) {
    return {0, -std::numeric_limits<double>::infinity()};
  }
  int sign = static_cast<int>(lu.permutationP().determinant());
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double u = packed(i, i);
    if (u < 0) sign = -sign;
    acc += std::log(std::abs(u));
  }
  return {sign, acc};
}

Matrix inverse(const Matrix& a) {
  require_square(a, "inverse");
  const Index n = a.rows();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  if (n > 0 && has_small_pivot(lu.matrixLU(), max_abs(a))) {
    throw Error(ErrorCode::singular_matrix, "matrix is not invertible");
  }
  return lu.inverse();
}

std::optional<std::vector<Index>> topological_order(const Adjacency& b) {
  const Index d = b.rows();
  std::vector<Index> indegree(static_cast<std::size_t>(d), 0);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      if (b(i, j) != 0) ++indegree[static_cast<std::size_t>(j)];

  std::deque<Index> ready;
  for (Index j = 0; j < d; ++j)
    if (indegree[static_cast<std::size_t>(j)] == 0) ready.push_back(j);

  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(d));
  while (!ready.empty()) {
    const Index u = ready.front();
    ready.pop_front();
    order.push_back(u);
    for (Index v = 0; v < d; ++v) {
      if (b(u, v) != 0 && --indegree[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
    }
  }
  if (static_cast<Index>(order.size()) != d) return std::nullopt;
  return order;
}

bool pattern_is_acyclic(const Matrix& a) {
  Adjacency pattern = (a.array() != 0.0).cast<int>();
  return topological_order(pattern).has_value();
}

SpectralRadius spectral_radius_nonneg(const Matrix& b, double tol, int max_iter) {
  require_square(b, "spectral_radius_nonneg");
  SpectralRadius out;
  const Index d = b.rows();
  if (d == 0 || max_abs(b) == 0.0 || pattern_is_acyclic(b)) {
    // Nilpotent pattern: every eigenvalue is zero.
    out.converged = true;
    return out;
  }

  // Power iteration on B + cI. The shift makes the Perron root strictly
  // dominant in modulus even for periodic (e.g. cyclic) patterns.
  const double shift = 0.5 * b.rowwise().sum().maxCoeff();
  Vector x = Vector::Ones(d);
  double estimate = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const Vector y = b * x;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Index i = 0; i < d; ++i) {
      if (x[i] > 0.0) {
        const double r = y[i] / x[i];
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      } else {
        lo = 0.0;
      }
    }
    out.lower = lo;
    out.upper = hi;
    out.iterations = it;

    Vector z = y + shift * x;
    const double scale = z.maxCoeff();
    estimate = scale - shift;  // x is normalized to max entry 1
    if (hi - lo <= tol * hi) {
      out.converged = true;
      out.value = 0.5 * (lo + hi);
      return out;
    }
    x = z / scale;
  }
  out.value = std::clamp(estimate, out.lower, out.upper);
  return out;
}

Matrix matrix_expm1(const Matrix& a) {
  require_square(a, "matrix_expm1");
  const double norm = norm1(a);
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix scaled = a * std::ldexp(1.0, -squarings);

  // For nonnegative input stop only once no entry changes, so entries that
  // first appear at high powers (the diagonal of a long cycle) survive.
  const bool nonnegative = (a.array() >= 0.0).all();
  Matrix sum = scaled;
  Matrix term = scaled;
  for (int k = 2; k <= 400; ++k) {
    Matrix next = (term * scaled) / static_cast<double>(k);
    term.swap(next);
    sum += term;
    const bool done = nonnegative ? (term.array() <= 0x1p-54 * sum.array()).all()
                                  : norm1(term) <= 1e-17 * norm1(sum);
    if (done) break;
  }
  for (int i = 0; i < squarings; ++i) {
    Matrix sq = sum * sum;
    sq += 2.0 * sum;
    sum.swap(sq);
  }
  return sum;
}

Matrix matrix_exp(const Matrix& a) {
  Matrix e = matrix_expm1(a);
  e.diagonal().array() += 1.0;
  return e;
}

Matrix matrix_power_minus_identity(const Matrix& a, std::uint64_t p) {
  require_square(a, "matrix_power_minus_identity");
  const Index n = a.rows();
  // Left-to-right binary exponentiation on F = (I + A)^k - I:
  //   k -> 2k:     F <- 2F + F^2
  //   k -> k + 1:  F <- F + A + F A
  Matrix f = Matrix::Zero(n, n);
  if (p == 0) return f;
  int top = 63;
  while (!((p >> top) & 1u)) --top;
  f = a;
  for (int bit = top - 1; bit >= 0; --bit) {
    Matrix sq = f * f;
    sq += 2.0 * f;
    f.swap(sq);
    if ((p >> bit) & 1u) {
      Matrix next = f * a;
      next += f;
      next += a;
      f.swap(next);
    }
  }
  return f;
}

Matrix matrix_int_power(const Matrix& a, std::uint64_t p) {
  require_square(a, "matrix_int_power");
  const Index n = a.rows();
  Matrix result = Matrix::Identity(n, n);
  Matrix base = a;
  bool first = true;
  while (p > 0) {
    if (p & 1u) {
      if (first) {
        result = base;
        first = false;
      } else {
        Matrix next = result * base;
        result.swap(next);
      }
    }
    p >>= 1u;
    if (p > 0) {
      Matrix sq = base * base;
      base.swap(sq);
    }
  }
  return result;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector vec(const Matrix& a) {
  Vector out(a.size());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) out[i + j * a.rows()] = a(i, j);
  return out;
}

Matrix commutation_matrix(Index d) {
  Matrix k = Matrix::Zero(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) k(i + j * d, j + i * d) = 1.0;
  return k;
}

std::optional<MMatrixLu> MMatrixLu::factor(const Matrix& a) {
  require_square(a, "MMatrixLu::factor");
  const Index n = a.rows();
  Eigen::MatrixXd lu = a;
  constexpr Index kBlock = 64;

  // Right-looking blocked elimination: factor a panel, solve for the U row
  // block, then update the trailing Schur complement with one GEMM.
  for (Index k = 0; k < n; k += kBlock) {
    const Index nb = std::min(kBlock, n - k);
    const Index rest = n - k - nb;
    for (Index j = k; j < k + nb; ++j) {
      const double pivot = lu(j, j);
      if (!(pivot > 0.0)) return std::nullopt;
      const Index below = n - j - 1;
      if (below == 0) continue;
      lu.col(j).tail(below) /= pivot;
      const Index right = k + nb - j - 1;
      if (right > 0) {
        lu.block(j + 1, j + 1, below, right).noalias() -=
            lu.col(j).tail(below) * lu.row(j).segment(j + 1, right);
      }
    }
    if (rest > 0) {
      lu.block(k, k + nb, nb, rest) = lu.block(k, k, nb, nb)
                                          .triangularView<Eigen::UnitLower>()
                                          .solve(lu.block(k, k + nb, nb, rest));
      lu.block(k + nb, k + nb, rest, rest).noalias() -=
          lu.block(k + nb, k, rest, nb) * lu.block(k, k + nb, nb, rest);
    }
  }
  return MMatrixLu(std::move(lu));
}

double MMatrixLu::log_det() const {
  double acc = 0.0;
  for (Index i = 0; i < lu_.rows(); ++i) acc += std::log(lu_(i, i));
  return acc;
}

Matrix MMatrixLu::inverse() const {
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(lu_.rows(), lu_.cols());
  lu_.triangularView<Eigen::UnitLower>().solveInPlace(x);
  lu_.triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

}  // namespace dagma
