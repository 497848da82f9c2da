#include "dagma/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "dagma/acyclicity.hpp"
#include "dagma/error.hpp"

namespace dagma {

namespace {

struct Objective {
  double score = 0.0;
  double h = 0.0;
  double l1 = 0.0;
  double total = 0.0;
};

Objective evaluate_objective(const ScoreModel& model, const Vector& theta, const LogDetBarrier& barrier,
                             double mu, double beta1) {
  Objective o;
  o.score = model.score(theta);
  o.l1 = model.l1_norm(theta);
  o.h = barrier.value();
  o.total = mu * (o.score + beta1 * o.l1) + o.h;
  return o;
}

std::string stage_context(int stage, int iteration, double s, double lr) {
  std::ostringstream os;
  os << "stage " << stage << ", iteration " << iteration << ", s = " << s << ", lr = " << lr;
  return os.str();
}

void invalid(const std::string& what) { throw Error(ErrorCode::invalid_config, what); }

}  // namespace

Vector adam_update(AdamState& state, const Vector& grad, double lr, double beta1, double beta2,
                   double eps) {
  if (grad.size() != state.first_moment.size()) {
    throw Error(ErrorCode::dimension_mismatch, "gradient and ADAM state differ in size");
  }
  if (!grad.allFinite()) throw Error(ErrorCode::non_finite_gradient, "gradient has NaN or Inf");
  ++state.step;
  state.first_moment = beta1 * state.first_moment + (1.0 - beta1) * grad;
  state.second_moment = beta2 * state.second_moment + (1.0 - beta2) * grad.cwiseAbs2();
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  return lr * ((state.first_moment / c1).array() / ((state.second_moment / c2).array().sqrt() + eps))
                  .matrix();
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::linear_l2: return "linear";
    case ModelKind::logistic: return "logistic";
    case ModelKind::mlp: return "mlp";
  }
  return "linear";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  if (s == "linear" || s == "linear_l2") return ModelKind::linear_l2;
  if (s == "logistic") return ModelKind::logistic;
  if (s == "mlp") return ModelKind::mlp;
  return std::nullopt;
}

DagmaConfig DagmaConfig::defaults(ModelKind model) {
  DagmaConfig c;
  c.model = model;
  switch (model) {
    case ModelKind::linear_l2:
      break;
    case ModelKind::logistic:
      c.mu0 = 10.0;
      c.beta1_l1 = 0.01;
      c.inner_max_iters = {10000, 10000, 10000, 50000};
      break;
    case ModelKind::mlp:
      c.mu0 = 0.1;
      c.beta1_l1 = 0.02;
      c.s_schedule = {1.0, 1.0, 1.0, 1.0};
      c.inner_max_iters = {70000, 70000, 70000, 80000};
      c.lr = 2e-4;
      break;
  }
  return c;
}

void DagmaConfig::validate() const {
  if (T < 1) invalid("T must be at least 1");
  if (static_cast<std::size_t>(T) != s_schedule.size()) {
    invalid("T = " + std::to_string(T) + " but s_schedule has " + std::to_string(s_schedule.size()) +
            " entries");
  }
  if (static_cast<std::size_t>(T) != inner_max_iters.size()) {
    invalid("T = " + std::to_string(T) + " but inner_max_iters has " +
            std::to_string(inner_max_iters.size()) + " entries");
  }
  for (double s : s_schedule)
    if (!(s > 0.0) || !std::isfinite(s)) invalid("every s must be a positive finite number");
  for (int it : inner_max_iters)
    if (it < 1) invalid("inner_max_iters entries must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) invalid("alpha must lie in (0, 1)");
  if (!(mu0 >= 0.0) || !std::isfinite(mu0)) invalid("mu0 must be a nonnegative finite number");
  if (!(beta1_l1 >= 0.0)) invalid("beta1_l1 must be nonnegative");
  if (!(lr > 0.0)) invalid("lr must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    invalid("ADAM betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) invalid("adam_eps must be positive");
  if (!(rel_tol >= 0.0)) invalid("rel_tol must be nonnegative");
  if (!(threshold >= 0.0)) invalid("threshold must be nonnegative");
  if (convergence_check_every < 1 || checkpoint_every < 1) invalid("check intervals must be positive");
  if (max_lr_halvings < 0) invalid("max_lr_halvings must be nonnegative");
  if (mlp_hidden < 1) invalid("mlp_hidden must be positive");
  if (!(mlp_init_scale > 0.0)) invalid("mlp_init_scale must be positive");
}

SubproblemResult solve_subproblem(const ScoreModel& model, const Vector& theta_init, double mu,
                                  double s, int max_iters, const DagmaConfig& cfg, int stage,
                                  std::vector<TraceRecord>* trace) {
  SubproblemResult out;
  Vector theta = theta_init;
  model.project(theta);

  Matrix squared = model.squared_adjacency(theta);
  std::optional<LogDetBarrier> barrier = LogDetBarrier::factor(squared, s);
  if (!barrier || !in_domain_squared(squared, s, DomainCheck::exact)) {
    throw Error(ErrorCode::domain_collapse,
                "starting point is outside the domain (" + stage_context(stage, 0, s, cfg.lr) + ")");
  }

  double lr = cfg.lr;
  const double lr_floor = cfg.lr / std::ldexp(1.0, cfg.max_lr_halvings);
  auto halve = [&](int iteration) {
    lr *= 0.5;
    if (lr < lr_floor) {
      throw Error(ErrorCode::domain_collapse,
                  "could not stay inside the domain (" + stage_context(stage, iteration, s, lr) + ")");
    }
  };

  auto record = [&](int iteration, const Objective& o) {
    if (!std::isfinite(o.total)) {
      throw Error(ErrorCode::non_finite_objective,
                  "objective is not finite (" + stage_context(stage, iteration, s, lr) + ")");
    }
    if (trace) trace->push_back({stage, iteration, mu, s, o.score, o.h, o.l1, o.total, lr});
  };

  Objective current = evaluate_objective(model, theta, *barrier, mu, cfg.beta1_l1);
  record(0, current);
  Vector best = theta;
  double best_objective = current.total;
  double previous = current.total;
  Vector last_good = theta;

  AdamState adam(theta.size());
  Vector grad(theta.size());
  int it = 1;
  for (; it <= max_iters; ++it) {
    model.score_and_grad(theta, grad);
    grad *= mu;
    model.add_l1_subgradient(theta, mu * cfg.beta1_l1, grad);
    // d h / d(W∘W) = (sI - W∘W)^{-T}.
    model.add_squared_adjacency_pullback(theta, barrier->resolvent().transpose(), grad);

    Vector delta = adam_update(adam, grad, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    for (;;) {
      Vector candidate = theta - delta;
      model.project(candidate);
      squared = model.squared_adjacency(candidate);
      if (auto next = LogDetBarrier::factor(squared, s)) {
        theta = std::move(candidate);
        barrier = std::move(next);
        break;
      }
      ++out.rejected_steps;
      halve(it);
      delta *= 0.5;
    }

    if (it % cfg.checkpoint_every == 0) {
      if (in_domain_squared(squared, s, DomainCheck::exact)) {
        last_good = theta;
      } else {
        theta = last_good;
        squared = model.squared_adjacency(theta);
        barrier = LogDetBarrier::factor(squared, s);
        halve(it);
        continue;
      }
    }

    if (it % cfg.convergence_check_every == 0 || it == max_iters) {
      current = evaluate_objective(model, theta, *barrier, mu, cfg.beta1_l1);
      record(it, current);
      if (current.total < best_objective) {
        best_objective = current.total;
        best = theta;
      }
      if (std::abs(previous - current.total) <= cfg.rel_tol * std::abs(previous)) {
        out.converged = true;
        break;
      }
      previous = current.total;
    }
  }

  out.theta = std::move(best);
  out.iterations = std::min(it, max_iters);
  out.final_lr = lr;
  return out;
}

std::unique_ptr<ScoreModel> make_model(const Matrix& x, const DagmaConfig& cfg) {
  switch (cfg.model) {
    case ModelKind::linear_l2: return make_linear_model(x);
    case ModelKind::logistic: return make_logistic_model(x);
    case ModelKind::mlp: return make_mlp_model(x, cfg.mlp_hidden, cfg.mlp_loss);
  }
  return make_linear_model(x);
}

FitResult dagma_fit(const Matrix& x, const DagmaConfig& cfg) {
  cfg.validate();
  return dagma_fit(*make_model(x, cfg), cfg);
}

FitResult dagma_fit(const ScoreModel& model, const DagmaConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  FitResult result;
  result.config = cfg;

  Vector theta = model.initial_params(cfg.seed, cfg.mlp_init_scale);
  model.project(theta);
  for (int tries = 0; !in_domain_squared(model.squared_adjacency(theta), cfg.s_schedule.front(),
                                         DomainCheck::exact);
       ++tries) {
    if (tries == 60) throw Error(ErrorCode::domain_collapse, "no in-domain starting point found");
    theta *= 0.5;
  }

  std::vector<double> mus;
  std::vector<double> ss = cfg.s_schedule;
  std::vector<int> caps = cfg.inner_max_iters;
  double mu = cfg.mu0;
  for (int t = 0; t < cfg.T; ++t) {
    mus.push_back(mu);
    mu *= cfg.alpha;
  }
  if (cfg.final_zero_mu_stage) {
    mus.push_back(0.0);
    ss.push_back(ss.back());
    caps.push_back(caps.back());
  }

  for (std::size_t t = 0; t < mus.size(); ++t) {
    // A smaller s can exclude the previous solution; shrink it back inside.
    for (int tries = 0; !in_domain_squared(model.squared_adjacency(theta), ss[t], DomainCheck::exact);
         ++tries) {
      if (tries == 60) {
        throw Error(ErrorCode::domain_collapse,
                    "stage " + std::to_string(t) + ": previous solution cannot be moved into the domain");
      }
      theta *= 0.9;
    }
    SubproblemResult r =
        solve_subproblem(model, theta, mus[t], ss[t], caps[t], cfg, static_cast<int>(t), &result.trace);
    theta = std::move(r.theta);
    result.stage_converged.push_back(r.converged);
    result.stage_mu.push_back(mus[t]);
  }

  result.theta = theta;
  result.w_continuous = model.adjacency(theta);
  result.b_thresholded = threshold(result.w_continuous, cfg.threshold);
  result.is_dag = is_dag(result.b_thresholded);
  auto barrier = LogDetBarrier::factor(model.squared_adjacency(theta), ss.back());
  result.h_final = barrier ? barrier->value() : std::numeric_limits<double>::infinity();
  if (!result.is_dag) {
    result.warnings.push_back("thresholded graph has a cycle; consider a larger threshold");
  }
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

Adjacency threshold(const Matrix& w, double tau) { return (w.array().abs() > tau).cast<int>(); }

bool is_dag(const Adjacency& b) { return topological_order(b).has_value(); }

}  // namespace dagma
