#pragma once

// Dense real linear algebra shared by every other module. Storage and the
// GEMM / triangular kernels come from Eigen; the algorithms specific to this
// library (log-determinant, M-matrix factorization, Perron root, Taylor
// exponential, Kronecker/commutation helpers) live here.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace dagma {

using Index = Eigen::Index;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Dense 0/1 adjacency; entry (i, j) == 1 means an edge i -> j.
using Adjacency = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// P·A = L·U with unit-lower L and upper U.
struct LuFactorization {
  Matrix lower;
  Matrix upper;
  /// Row i of P·A is row permutation[i] of A.
  std::vector<Index> permutation;
  int permutation_sign = 1;
};

/// Partial-pivoting LU. Throws Error(singular_matrix) when a pivot magnitude
/// falls below 1e-13 * max|A|.
LuFactorization lu_decompose(const Matrix& a);

struct LogDet {
  int sign = 0;  // -1, 0 or +1
  double log_abs_det = 0.0;
};

/// sign(det A) and log|det A| from LU pivots. Singular input yields
/// sign == 0 and log_abs_det == -inf.
LogDet log_det(const Matrix& a);

/// Throws Error(singular_matrix) under the same pivot rule as lu_decompose.
Matrix inverse(const Matrix& a);

struct SpectralRadius {
  double value = 0.0;
  // Collatz-Wielandt bracket from the last iterate; always lower <= rho <= upper.
  double lower = 0.0;
  double upper = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Perron root of an entrywise nonnegative matrix by shifted power iteration
/// from the all-ones vector. Converged means (upper - lower) <= tol * upper.
SpectralRadius spectral_radius_nonneg(const Matrix& b, double tol = 1e-6, int max_iter = 1000);

/// Scaling-and-squaring with a truncated Taylor series.
Matrix matrix_exp(const Matrix& a);

/// e^A - I, squared through E(2A) = 2E(A) + E(A)^2. For nonnegative A no
/// subtraction occurs, so tiny traces keep full relative accuracy.
Matrix matrix_expm1(const Matrix& a);

/// (I + A)^p - I with the same property; p = 0 gives zero.
Matrix matrix_power_minus_identity(const Matrix& a, std::uint64_t p);

/// A^p by binary exponentiation; A^0 = I.
Matrix matrix_int_power(const Matrix& a, std::uint64_t p);

Matrix kron(const Matrix& a, const Matrix& b);

/// Column-stacking vec: vec(A)[i + j * rows] = A(i, j).
Vector vec(const Matrix& a);

/// d^2 x d^2 permutation K with K * vec(A) == vec(A^T).
Matrix commutation_matrix(Index d);

/// Largest absolute entry (0 for an empty matrix).
double max_abs(const Matrix& a);

/// Kahn topological sort on the nonzero pattern of a square matrix.
/// Returns the order when the pattern is acyclic.
std::optional<std::vector<Index>> topological_order(const Adjacency& b);
bool pattern_is_acyclic(const Matrix& a);

/// LU without pivoting of a Z-matrix (nonpositive off-diagonal). It succeeds
/// iff every pivot is strictly positive, which for a Z-matrix is equivalent to
/// being a nonsingular M-matrix. The elimination never mixes signs, so the
/// inverse is entrywise nonnegative and structural zeros of the inverse are
/// reproduced exactly.
class MMatrixLu {
 public:
  static std::optional<MMatrixLu> factor(const Matrix& a);

  Index size() const { return lu_.rows(); }
  /// Diagonal of U.
  Vector pivots() const { return lu_.diagonal(); }
  double log_det() const;
  Matrix inverse() const;

 private:
  explicit MMatrixLu(Eigen::MatrixXd lu) : lu_(std::move(lu)) {}

  Eigen::MatrixXd lu_;  // packed L\U, column-major for the blocked kernels
};

}  // namespace dagma
