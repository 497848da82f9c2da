#include "dagma/score.hpp"

#include <cmath>
#include <string>

#include "dagma/error.hpp"
#include "dagma/rng.hpp"

namespace dagma {

namespace {

void check_dims(const Matrix& x, Index d) {
  if (x.cols() != d) {
    throw Error(ErrorCode::dimension_mismatch, "data has " + std::to_string(x.cols()) +
                                                   " columns but parameters describe " +
                                                   std::to_string(d) + " nodes");
  }
  if (x.rows() < 1) throw Error(ErrorCode::dimension_mismatch, "data has no samples");
}

void check_square(const Matrix& x, const Matrix& w) {
  if (w.rows() != w.cols()) throw Error(ErrorCode::dimension_mismatch, "W must be square");
  check_dims(x, w.rows());
}

void check_binary(const Matrix& x) {
  if (!(x.array() == 0.0 || x.array() == 1.0).all()) {
    throw Error(ErrorCode::non_binary_data, "logistic score needs 0/1 data");
  }
}

Matrix sigmoid_array(const Matrix& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

double sign_of(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

}  // namespace

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double least_squares_score(const Matrix& x, const Matrix& w) {
  check_square(x, w);
  const Matrix r = x - x * w;
  return 0.5 / static_cast<double>(x.rows()) * r.squaredNorm();
}

Matrix least_squares_grad(const Matrix& x, const Matrix& w) {
  check_square(x, w);
  const Matrix r = x - x * w;
  Matrix g = -(x.transpose() * r) / static_cast<double>(x.rows());
  g.diagonal().setZero();
  return g;
}

double logistic_score(const Matrix& x, const Matrix& w) {
  check_square(x, w);
  check_binary(x);
  const Matrix z = x * w;
  double acc = 0.0;
  for (Index i = 0; i < z.rows(); ++i)
    for (Index j = 0; j < z.cols(); ++j) acc += softplus(z(i, j)) - x(i, j) * z(i, j);
  return acc / static_cast<double>(x.rows());
}

Matrix logistic_grad(const Matrix& x, const Matrix& w) {
  check_square(x, w);
  check_binary(x);
  const Matrix p = sigmoid_array(x * w);
  Matrix g = x.transpose() * (p - x) / static_cast<double>(x.rows());
  g.diagonal().setZero();
  return g;
}

// ---------------------------------------------------------------------------

MlpParams::MlpParams(Index d, Index hidden, Vector values)
    : d_(d), hidden_(hidden), values_(std::move(values)) {
  if (values_.size() != size(d, hidden)) {
    throw Error(ErrorCode::dimension_mismatch, "MLP parameter vector has the wrong length");
  }
}

void MlpParams::project() {
  auto a = first_layer();
  for (Index j = 0; j < d_; ++j) a.block(j * hidden_, j, hidden_, 1).setZero();
}

namespace {

Matrix hidden_layer(const Matrix& x, const MlpParams& theta) {
  Matrix pre = x * theta.first_layer().transpose();
  pre.rowwise() += theta.first_bias().transpose();
  return sigmoid_array(pre);
}

Matrix output_layer(const Matrix& h, const MlpParams& theta) {
  const Index d = theta.nodes();
  const Index m = theta.hidden();
  Matrix f(h.rows(), d);
  const auto v = theta.output_weights();
  const auto c = theta.output_bias();
  for (Index j = 0; j < d; ++j) {
    f.col(j) = h.middleCols(j * m, m) * v.segment(j * m, m);
    f.col(j).array() += c[j];
  }
  return f;
}

// d score / d f, column by column, together with the score itself.
double loss_and_seed(const Matrix& x, const Matrix& f, MlpLoss loss, Matrix* seed) {
  const auto n = static_cast<double>(x.rows());
  const Matrix r = x - f;
  double score = 0.0;
  if (seed) seed->resize(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double rss = r.col(j).squaredNorm();
    if (loss == MlpLoss::log_likelihood) {
      score += 0.5 * std::log(rss / n);
      if (seed) seed->col(j) = -r.col(j) / rss;
    } else {
      score += 0.5 * rss / n;
      if (seed) seed->col(j) = -r.col(j) / n;
    }
  }
  return score;
}

}  // namespace

Matrix mlp_forward(const Matrix& x, const MlpParams& theta) {
  check_dims(x, theta.nodes());
  return output_layer(hidden_layer(x, theta), theta);
}

double mlp_score(const Matrix& x, const MlpParams& theta, MlpLoss loss) {
  return loss_and_seed(x, mlp_forward(x, theta), loss, nullptr);
}

MlpScore mlp_score_and_grad(const Matrix& x, const MlpParams& theta, MlpLoss loss) {
  check_dims(x, theta.nodes());
  const Index d = theta.nodes();
  const Index m = theta.hidden();
  const Matrix h = hidden_layer(x, theta);
  const Matrix f = output_layer(h, theta);

  Matrix g;
  MlpScore out{loss_and_seed(x, f, loss, &g), MlpParams(d, m)};

  const auto v = theta.output_weights();
  auto dv = out.grad.output_weights();
  auto dc = out.grad.output_bias();
  Matrix delta(h.rows(), d * m);
  for (Index j = 0; j < d; ++j) {
    const auto hj = h.middleCols(j * m, m);
    dv.segment(j * m, m) = hj.transpose() * g.col(j);
    dc[j] = g.col(j).sum();
    delta.middleCols(j * m, m) =
        ((g.col(j) * v.segment(j * m, m).transpose()).array() * hj.array() * (1.0 - hj.array()))
            .matrix();
  }
  out.grad.first_layer() = delta.transpose() * x;
  out.grad.first_bias() = delta.colwise().sum().transpose();
  out.grad.project();
  return out;
}

Matrix adjacency_of(const MlpParams& theta) {
  const Index d = theta.nodes();
  const Index m = theta.hidden();
  const auto a = theta.first_layer();
  Matrix w(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) w(i, j) = a.block(j * m, i, m, 1).norm();
  return w;
}

// ---------------------------------------------------------------------------

Matrix unflatten_square(const Vector& theta, Index d) {
  return Eigen::Map<const Matrix>(theta.data(), d, d);
}

Vector flatten(const Matrix& w) { return Eigen::Map<const Vector>(w.data(), w.size()); }

namespace {

class LinearFamily : public ScoreModel {
 public:
  explicit LinearFamily(const Matrix& x)
      : d_(x.cols()), cov_(x.transpose() * x / static_cast<double>(x.rows())) {
    if (x.rows() < 1 || x.cols() < 2) {
      throw Error(ErrorCode::dimension_mismatch, "need n >= 1 samples and d >= 2 variables");
    }
  }

  Index nodes() const override { return d_; }
  Index num_params() const override { return d_ * d_; }
  Vector initial_params(std::uint64_t, double) const override { return Vector::Zero(d_ * d_); }

  Matrix adjacency(const Vector& theta) const override { return unflatten_square(theta, d_); }
  Matrix squared_adjacency(const Vector& theta) const override {
    return theta.cwiseProduct(theta).reshaped<Eigen::RowMajor>(d_, d_);
  }
  void add_squared_adjacency_pullback(const Vector& theta, const Matrix& g,
                                      Vector& grad) const override {
    grad += 2.0 * theta.cwiseProduct(flatten(g));
  }

  double l1_norm(const Vector& theta) const override { return theta.lpNorm<1>(); }
  void add_l1_subgradient(const Vector& theta, double coef, Vector& grad) const override {
    grad += coef * theta.unaryExpr(&sign_of);
  }
  void project(Vector& theta) const override {
    for (Index i = 0; i < d_; ++i) theta[i * d_ + i] = 0.0;
  }

 protected:
  Index d_;
  Matrix cov_;
};

class LinearLeastSquares final : public LinearFamily {
 public:
  using LinearFamily::LinearFamily;

  ModelKind kind() const override { return ModelKind::linear_l2; }

  double score(const Vector& theta) const override {
    Matrix r = -unflatten_square(theta, d_);
    r.diagonal().array() += 1.0;
    return 0.5 * r.cwiseProduct(cov_ * r).sum();
  }

  double score_and_grad(const Vector& theta, Vector& grad) const override {
    Matrix r = -unflatten_square(theta, d_);
    r.diagonal().array() += 1.0;
    Matrix sr = cov_ * r;
    const double value = 0.5 * r.cwiseProduct(sr).sum();
    sr.diagonal().setZero();
    grad = -flatten(sr);
    return value;
  }
};

class Logistic final : public LinearFamily {
 public:
  explicit Logistic(const Matrix& x) : LinearFamily(x), x_(x) { check_binary(x); }

  ModelKind kind() const override { return ModelKind::logistic; }

  double score(const Vector& theta) const override {
    const Matrix z = x_ * unflatten_square(theta, d_);
    const double fit = z.unaryExpr(&softplus).sum() / static_cast<double>(x_.rows());
    // x_j ∘ X w_j summed over samples equals <X^T X / n, W>.
    return fit - cov_.cwiseProduct(unflatten_square(theta, d_)).sum();
  }

  double score_and_grad(const Vector& theta, Vector& grad) const override {
    const Matrix w = unflatten_square(theta, d_);
    const Matrix z = x_ * w;
    const auto n = static_cast<double>(x_.rows());
    const double value = z.unaryExpr(&softplus).sum() / n - cov_.cwiseProduct(w).sum();
    Matrix g = x_.transpose() * sigmoid_array(z) / n - cov_;
    g.diagonal().setZero();
    grad = flatten(g);
    return value;
  }

 private:
  Matrix x_;
};

class Mlp final : public ScoreModel {
 public:
  Mlp(const Matrix& x, Index hidden, MlpLoss loss) : x_(x), hidden_(hidden), loss_(loss) {
    if (x.rows() < 1 || x.cols() < 2 || hidden < 1) {
      throw Error(ErrorCode::dimension_mismatch, "need n >= 1, d >= 2 and a hidden layer");
    }
  }

  ModelKind kind() const override { return ModelKind::mlp; }
  Index nodes() const override { return x_.cols(); }
  Index num_params() const override { return MlpParams::size(x_.cols(), hidden_); }

  Vector initial_params(std::uint64_t seed, double scale) const override {
    Rng rng = Rng(seed).child(Stream::init);
    MlpParams p(nodes(), hidden_);
    auto a = p.first_layer();
    for (Index r = 0; r < a.rows(); ++r)
      for (Index c = 0; c < a.cols(); ++c) a(r, c) = rng.uniform(-scale, scale);
    for (Index i = 0; i < p.first_bias().size(); ++i) p.first_bias()[i] = rng.uniform(-scale, scale);
    for (Index i = 0; i < p.output_weights().size(); ++i)
      p.output_weights()[i] = rng.uniform(-scale, scale);
    p.project();
    return p.values();
  }

  double score(const Vector& theta) const override { return mlp_score(x_, view(theta), loss_); }

  double score_and_grad(const Vector& theta, Vector& grad) const override {
    MlpScore s = mlp_score_and_grad(x_, view(theta), loss_);
    grad = std::move(s.grad.values());
    return s.score;
  }

  Matrix adjacency(const Vector& theta) const override { return adjacency_of(view(theta)); }

  Matrix squared_adjacency(const Vector& theta) const override {
    const Index d = nodes();
    const Eigen::Map<const Matrix> a(theta.data(), d * hidden_, d);
    Matrix b(d, d);
    for (Index j = 0; j < d; ++j)
      for (Index i = 0; i < d; ++i) b(i, j) = a.block(j * hidden_, i, hidden_, 1).squaredNorm();
    return b;
  }

  void add_squared_adjacency_pullback(const Vector& theta, const Matrix& g,
                                      Vector& grad) const override {
    const Index d = nodes();
    const Eigen::Map<const Matrix> a(theta.data(), d * hidden_, d);
    Eigen::Map<Matrix> ga(grad.data(), d * hidden_, d);
    for (Index j = 0; j < d; ++j)
      for (Index i = 0; i < d; ++i)
        ga.block(j * hidden_, i, hidden_, 1) += 2.0 * g(i, j) * a.block(j * hidden_, i, hidden_, 1);
  }

  // Only the first layer, which defines W(θ), carries the l1 penalty.
  double l1_norm(const Vector& theta) const override { return theta.head(first_layer_size()).lpNorm<1>(); }
  void add_l1_subgradient(const Vector& theta, double coef, Vector& grad) const override {
    const Index k = first_layer_size();
    grad.head(k) += coef * theta.head(k).unaryExpr(&sign_of);
  }

  void project(Vector& theta) const override {
    const Index d = nodes();
    Eigen::Map<Matrix> a(theta.data(), d * hidden_, d);
    for (Index j = 0; j < d; ++j) a.block(j * hidden_, j, hidden_, 1).setZero();
  }

 private:
  Index first_layer_size() const { return nodes() * hidden_ * nodes(); }
  MlpParams view(const Vector& theta) const { return MlpParams(nodes(), hidden_, theta); }

  Matrix x_;
  Index hidden_;
  MlpLoss loss_;
};

}  // namespace

std::unique_ptr<ScoreModel> make_linear_model(const Matrix& x) {
  return std::make_unique<LinearLeastSquares>(x);
}

std::unique_ptr<ScoreModel> make_logistic_model(const Matrix& x) {
  return std::make_unique<Logistic>(x);
}

std::unique_ptr<ScoreModel> make_mlp_model(const Matrix& x, Index hidden, MlpLoss loss) {
  return std::make_unique<Mlp>(x, hidden, loss);
}

}  // namespace dagma
