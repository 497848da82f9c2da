#pragma once

// Central-path structure learning: a sequence of unconstrained problems
//   min_θ  mu_t (Q(θ; X) + beta1 ||θ||_1) + h_ldet^{s_t}(W(θ))
// with mu_{t+1} = alpha * mu_t, each solved by ADAM from the previous
// solution while staying inside {W : rho(W∘W) < s_t}.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dagma/matrix.hpp"
#include "dagma/score.hpp"

namespace dagma {

struct AdamState {
  explicit AdamState(Index n) : first_moment(Vector::Zero(n)), second_moment(Vector::Zero(n)) {}

  Vector first_moment;
  Vector second_moment;
  std::int64_t step = 0;
};

/// Bias-corrected ADAM; returns the delta to subtract from θ. Throws
/// Error(non_finite_gradient) on NaN/Inf input.
Vector adam_update(AdamState& state, const Vector& grad, double lr, double beta1, double beta2,
                   double eps);

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view s);

struct DagmaConfig {
  ModelKind model = ModelKind::linear_l2;
  int T = 4;
  double mu0 = 1.0;
  double alpha = 0.1;
  double beta1_l1 = 0.05;
  std::vector<double> s_schedule{1.0, 0.9, 0.8, 0.7};
  std::vector<int> inner_max_iters{20000, 20000, 20000, 70000};
  double lr = 3e-4;
  double adam_beta1 = 0.99;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double rel_tol = 1e-6;
  double threshold = 0.3;
  /// Objective evaluation / convergence test cadence (inner iterations).
  int convergence_check_every = 100;
  /// Exact (spectral-radius) domain check cadence (inner iterations).
  int checkpoint_every = 1000;
  /// Step rejections may halve the learning rate down to lr / 2^max_lr_halvings.
  int max_lr_halvings = 10;
  /// Append a stage with mu = 0 (s and iteration cap of the last stage).
  bool final_zero_mu_stage = false;
  Index mlp_hidden = 10;
  MlpLoss mlp_loss = MlpLoss::log_likelihood;
  double mlp_init_scale = 0.1;
  std::uint64_t seed = 0;

  /// Hyperparameters used for each model family in the reference experiments.
  static DagmaConfig defaults(ModelKind model);

  /// Throws Error(invalid_config) describing the first violated constraint.
  void validate() const;
};

struct TraceRecord {
  int stage = 0;
  int iteration = 0;
  double mu = 0.0;
  double s = 0.0;
  double score = 0.0;
  double h = 0.0;
  double l1 = 0.0;
  double objective = 0.0;
  double lr = 0.0;
};

struct SubproblemResult {
  Vector theta;
  bool converged = false;
  int iterations = 0;
  int rejected_steps = 0;
  double final_lr = 0.0;
};

/// ADAM on the stage objective starting from theta_init, which must satisfy
/// the exact domain test for s. Every candidate step is checked by factoring
/// sI - W∘W as an M-matrix; a failing step is retried with half the learning
/// rate. Returns the best checkpoint iterate, so the objective never ends
/// above its starting value. Throws Error(domain_collapse) or
/// Error(non_finite_objective).
SubproblemResult solve_subproblem(const ScoreModel& model, const Vector& theta_init, double mu,
                                  double s, int max_iters, const DagmaConfig& cfg, int stage,
                                  std::vector<TraceRecord>* trace = nullptr);

struct FitResult {
  Vector theta;
  Matrix w_continuous;
  Adjacency b_thresholded;
  std::vector<TraceRecord> trace;
  std::vector<bool> stage_converged;
  /// mu used for each stage, in order.
  std::vector<double> stage_mu;
  double h_final = 0.0;  // h_ldet of w_continuous at the last stage's s
  bool is_dag = false;
  std::vector<std::string> warnings;
  double wall_time_seconds = 0.0;
  DagmaConfig config;
};

FitResult dagma_fit(const Matrix& x, const DagmaConfig& cfg);
FitResult dagma_fit(const ScoreModel& model, const DagmaConfig& cfg);

std::unique_ptr<ScoreModel> make_model(const Matrix& x, const DagmaConfig& cfg);

/// B(i, j) = 1 iff |W(i, j)| > tau.
Adjacency threshold(const Matrix& w, double tau);

bool is_dag(const Adjacency& b);

}  // namespace dagma
