#pragma once

// Acyclicity characterizations of a weighted adjacency W, where W(i, j) is
// the weight of the edge i -> j. All four functions depend on W only through
// the squared matrix W∘W and vanish exactly on DAGs.

#include <optional>
#include <string>

#include "dagma/matrix.hpp"

namespace dagma {

struct Acyclicity {
  enum class Kind { ldet, expm, poly, tinv };

  Kind kind = Kind::ldet;
  double s = 1.0;  // only meaningful for ldet

  static Acyclicity ldet(double s) { return {Kind::ldet, s}; }
  static Acyclicity expm() { return {Kind::expm, 1.0}; }
  static Acyclicity poly() { return {Kind::poly, 1.0}; }
  static Acyclicity tinv() { return {Kind::tinv, 1.0}; }
};

std::string to_string(const Acyclicity& kind);

enum class DomainCheck {
  /// det(sI - W∘W) > 0 via pivoted LU: necessary, cheap.
  fast,
  /// Perron root of W∘W against s, with the M-matrix pivot test as a
  /// tie-breaker when power iteration cannot decide.
  exact,
};

/// Whether W lies in {W : rho(W∘W) < s}.
bool in_domain(const Matrix& w, double s, DomainCheck mode);
/// Same test on an already squared (nonnegative) matrix B = W∘W.
bool in_domain_squared(const Matrix& b, double s, DomainCheck mode);

/// -log det(sI - B) + d log s and its derivative with respect to B, for a
/// nonnegative B with rho(B) < s. Built on MMatrixLu, so the inverse is formed
/// only when a derivative is requested.
class LogDetBarrier {
 public:
  /// nullopt when sI - B is not a nonsingular M-matrix.
  static std::optional<LogDetBarrier> factor(const Matrix& squared, double s);

  double value() const { return value_; }
  /// N = (sI - B)^{-1}.
  Matrix resolvent() const { return lu_.inverse(); }

 private:
  LogDetBarrier(MMatrixLu lu, double value) : lu_(std::move(lu)), value_(value) {}

  MMatrixLu lu_;
  double value_;
};

/// Throws Error(out_of_domain) for ldet / tinv outside their domain.
double h_value(const Matrix& w, const Acyclicity& kind);
Matrix h_gradient(const Matrix& w, const Acyclicity& kind);

struct HEvaluation {
  double value = 0.0;
  Matrix gradient;
};

/// Value and gradient sharing one factorization / exponential / power.
HEvaluation h_value_and_gradient(const Matrix& w, const Acyclicity& kind);

/// Hessian of h_ldet in Kronecker form:
///   4 Diag(vec W) (N ⊗ N^T) Diag(vec W^T) K + 2 Diag(vec N^T),
/// with column-stacking vec, so entry [i + j d, p + q d] is
/// d^2 h / dW(i,j) dW(p,q). Throws Error(dimension_too_large) above max_dim.
Matrix h_hessian_full(const Matrix& w, double s, Index max_dim = 64);

/// Entrywise Hessian form indexed by vertex pairs (k,l), (p,q):
///   4 W(l,k) N(k,q) N(p,l) W(q,p)             for (k,l) != (p,q)
///   4 W(l,k)^2 N(k,l)^2 + 2 N(k,l)            for (k,l) == (p,q).
/// The pair (k,l) labels the variable W(l,k): the value equals
/// h_hessian_full(w, s)(l + k d, q + p d).
double h_hessian_entry(const Matrix& w, double s, Index k, Index l, Index p, Index q);

}  // namespace dagma
