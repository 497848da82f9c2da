#pragma once

// Score functions Q(θ; X) for the three SEM families, their gradients, and
// the weighted adjacency W(θ) each parametrization induces.

#include <cstdint>
#include <memory>

#include "dagma/matrix.hpp"

namespace dagma {

// ---------------------------------------------------------------------------
// Linear families: θ is a d x d matrix W with zero diagonal; column j holds
// the coefficients of x_j's structural equation.

/// (1 / 2n) ||X - XW||_F^2, summed entry by entry.
double least_squares_score(const Matrix& x, const Matrix& w);
/// -(1/n) X^T (X - XW), diagonal zeroed.
Matrix least_squares_grad(const Matrix& x, const Matrix& w);

/// (1/n) sum_j 1^T (log(1 + exp(X w_j)) - x_j ∘ X w_j) for 0/1 data.
/// Throws Error(non_binary_data) if X has an entry outside {0, 1}.
double logistic_score(const Matrix& x, const Matrix& w);
/// (1/n) X^T (sigmoid(XW) - X), diagonal zeroed.
Matrix logistic_grad(const Matrix& x, const Matrix& w);

/// log(1 + e^z) without overflow.
double softplus(double z);
double sigmoid(double z);

// ---------------------------------------------------------------------------
// One-hidden-layer MLP per node: f_j(X) = sigmoid(X A_j^T + 1 b_j^T) v_j + c_j.

/// Parameters for all d node networks in one flat vector laid out as
/// [A (d*hidden x d, row-major) | b (d*hidden) | v (d*hidden) | c (d)].
/// Rows j*hidden .. (j+1)*hidden-1 of A form A_j; column j of A_j is the
/// self-input and is kept at zero.
class MlpParams {
 public:
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  MlpParams(Index d, Index hidden) : d_(d), hidden_(hidden), values_(Vector::Zero(size(d, hidden))) {}
  MlpParams(Index d, Index hidden, Vector values);

  static Index size(Index d, Index hidden) { return d * hidden * d + 2 * d * hidden + d; }

  Index nodes() const { return d_; }
  Index hidden() const { return hidden_; }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }

  MatrixMap first_layer() { return {values_.data(), d_ * hidden_, d_}; }
  ConstMatrixMap first_layer() const { return {values_.data(), d_ * hidden_, d_}; }
  VectorMap first_bias() { return {values_.data() + a_size(), d_ * hidden_}; }
  ConstVectorMap first_bias() const { return {values_.data() + a_size(), d_ * hidden_}; }
  VectorMap output_weights() { return {values_.data() + a_size() + d_ * hidden_, d_ * hidden_}; }
  ConstVectorMap output_weights() const {
    return {values_.data() + a_size() + d_ * hidden_, d_ * hidden_};
  }
  VectorMap output_bias() { return {values_.data() + a_size() + 2 * d_ * hidden_, d_}; }
  ConstVectorMap output_bias() const {
    return {values_.data() + a_size() + 2 * d_ * hidden_, d_};
  }

  /// Zero every self-input column.
  void project();

 private:
  Index a_size() const { return d_ * hidden_ * d_; }

  Index d_;
  Index hidden_;
  Vector values_;
};

enum class MlpLoss {
  /// (1/2) sum_j log(RSS_j / n): per-node Gaussian profile log-likelihood,
  /// per sample.
  log_likelihood,
  /// (1 / 2n) sum_j RSS_j.
  least_squares,
};

/// n x d matrix of node predictions f_j(X).
Matrix mlp_forward(const Matrix& x, const MlpParams& theta);

struct MlpScore {
  double score = 0.0;
  MlpParams grad;
};

/// Score and its gradient by hand-written reverse accumulation.
MlpScore mlp_score_and_grad(const Matrix& x, const MlpParams& theta,
                            MlpLoss loss = MlpLoss::log_likelihood);
double mlp_score(const Matrix& x, const MlpParams& theta, MlpLoss loss = MlpLoss::log_likelihood);

/// W(θ) for the linear family is W itself (no absolute value).
inline Matrix adjacency_of(const Matrix& w) { return w; }
/// W(θ)(i, j) = ||column i of A_j||_2.
Matrix adjacency_of(const MlpParams& theta);

// ---------------------------------------------------------------------------
// Flat-parameter view used by the optimizer.

enum class ModelKind { linear_l2, logistic, mlp };

class ScoreModel {
 public:
  virtual ~ScoreModel() = default;

  virtual ModelKind kind() const = 0;
  virtual Index nodes() const = 0;
  virtual Index num_params() const = 0;
  /// Starting point of the central path (zero for linear models).
  virtual Vector initial_params(std::uint64_t seed, double scale) const = 0;

  virtual double score(const Vector& theta) const = 0;
  /// Returns the score and overwrites grad with its gradient.
  virtual double score_and_grad(const Vector& theta, Vector& grad) const = 0;

  virtual Matrix adjacency(const Vector& theta) const = 0;
  /// W(θ)∘W(θ), the matrix the acyclicity term sees.
  virtual Matrix squared_adjacency(const Vector& theta) const = 0;
  /// grad += J^T g where g = dh / d(W∘W) and J = d(W∘W) / dθ.
  virtual void add_squared_adjacency_pullback(const Vector& theta, const Matrix& g,
                                              Vector& grad) const = 0;

  /// ||θ||_1 over the penalized coordinates.
  virtual double l1_norm(const Vector& theta) const = 0;
  /// grad += coef * sign(θ) on the penalized coordinates, sign(0) = 0.
  virtual void add_l1_subgradient(const Vector& theta, double coef, Vector& grad) const = 0;

  /// Re-impose structural zeros (diagonal / self-input columns).
  virtual void project(Vector& theta) const = 0;
};

/// Least squares through the precomputed covariance X^T X / n.
std::unique_ptr<ScoreModel> make_linear_model(const Matrix& x);
std::unique_ptr<ScoreModel> make_logistic_model(const Matrix& x);
std::unique_ptr<ScoreModel> make_mlp_model(const Matrix& x, Index hidden, MlpLoss loss);

/// Flat θ <-> W for the linear families (row-major).
Matrix unflatten_square(const Vector& theta, Index d);
Vector flatten(const Matrix& w);

}  // namespace dagma
