#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dagma/acyclicity.hpp"
#include "dagma/datagen.hpp"
#include "dagma/error.hpp"
#include "dagma/metrics.hpp"
#include "dagma/optimizer.hpp"
#include "support.hpp"

using namespace dagma;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::io;
}

// Textbook ADAM written out per coordinate.
struct ReferenceAdam {
  std::vector<double> m, v;
  int t = 0;
  std::vector<double> step(const std::vector<double>& g, double lr, double b1, double b2, double eps) {
    if (m.empty()) m.assign(g.size(), 0.0), v.assign(g.size(), 0.0);
    ++t;
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = b1 * m[i] + (1 - b1) * g[i];
      v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(b1, t));
      const double vh = v[i] / (1 - std::pow(b2, t));
      out[i] = lr * mh / (std::sqrt(vh) + eps);
    }
    return out;
  }
};

Simulation linear_instance(Index d, double k, std::uint64_t seed, Index n = 1000) {
  SimulationSpec spec;
  spec.d = d;
  spec.k = k;
  spec.n = n;
  spec.seed = seed;
  return simulate(spec);
}

}  // namespace

TEST_CASE("adam") {
  SUBCASE("zero gradient gives zero updates") {
    AdamState s(5);
    for (int i = 0; i < 100; ++i) CHECK(adam_update(s, Vector::Zero(5), 1e-3, 0.99, 0.999, 1e-8).isZero(0.0));
    CHECK(s.step == 100);
  }
  SUBCASE("constant gradient: step magnitude tends to lr") {
    AdamState s(3);
    Vector g(3);
    g << 2.0, -0.5, 1e-3;
    Vector delta;
    for (int i = 0; i < 2000; ++i) delta = adam_update(s, g, 1e-2, 0.99, 0.999, 1e-8);
    CHECK(delta[0] == doctest::Approx(1e-2).epsilon(1e-6));
    CHECK(delta[1] == doctest::Approx(-1e-2).epsilon(1e-6));
    CHECK(delta[2] == doctest::Approx(1e-2).epsilon(1e-4));
  }
  SUBCASE("matches a per-coordinate reference and is deterministic") {
    Rng rng = Rng(51).child(Stream::test);
    AdamState a(4), b(4);
    ReferenceAdam ref;
    for (int it = 0; it < 300; ++it) {
      Vector g(4);
      for (Index i = 0; i < 4; ++i) g[i] = rng.normal();
      const Vector da = adam_update(a, g, 3e-4, 0.9, 0.999, 1e-8);
      const Vector db = adam_update(b, g, 3e-4, 0.9, 0.999, 1e-8);
      const std::vector<double> dr = ref.step({g[0], g[1], g[2], g[3]}, 3e-4, 0.9, 0.999, 1e-8);
      CHECK(da == db);
      for (Index i = 0; i < 4; ++i) CHECK(da[i] == doctest::Approx(dr[static_cast<std::size_t>(i)]).epsilon(1e-12));
    }
  }
  SUBCASE("non-finite gradient") {
    AdamState s(2);
    Vector g(2);
    g << 1.0, std::nan("");
    CHECK(code_of([&] { adam_update(s, g, 1e-3, 0.9, 0.999, 1e-8); }) == ErrorCode::non_finite_gradient);
  }
}

TEST_CASE("threshold and is_dag") {
  Matrix w(2, 2);
  w << 0.0, 0.29, 0.31, 0.0;
  const Adjacency b = threshold(w, 0.3);
  CHECK(b(0, 1) == 0);
  CHECK(b(1, 0) == 1);
  CHECK(threshold(-w, 0.3)(1, 0) == 1);

  Matrix full = Matrix::Constant(4, 4, 0.01);
  full.diagonal().setZero();
  CHECK(threshold(full, 0.0).sum() == 12);
  CHECK(threshold(full, 1e300).sum() == 0);

  CHECK(is_dag(Adjacency::Zero(5, 5)));
  Adjacency two = Adjacency::Zero(2, 2);
  two(0, 1) = two(1, 0) = 1;
  CHECK_FALSE(is_dag(two));
  for (std::uint64_t s = 0; s < 20; ++s) CHECK(is_dag(sample_sf_dag(30, 3, s)));
}

TEST_CASE("config validation and defaults") {
  DagmaConfig c = DagmaConfig::defaults(ModelKind::linear_l2);
  CHECK_NOTHROW(c.validate());
  CHECK(c.mu0 == 1.0);
  CHECK(c.beta1_l1 == 0.05);
  CHECK(c.inner_max_iters == std::vector<int>{20000, 20000, 20000, 70000});
  const DagmaConfig lg = DagmaConfig::defaults(ModelKind::logistic);
  CHECK(lg.mu0 == 10.0);
  CHECK(lg.beta1_l1 == 0.01);
  const DagmaConfig mlp = DagmaConfig::defaults(ModelKind::mlp);
  CHECK(mlp.s_schedule == std::vector<double>{1, 1, 1, 1});
  CHECK(mlp.lr == 2e-4);

  c.s_schedule = {1.0, 0.9};
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::invalid_config);
  c = DagmaConfig::defaults(ModelKind::linear_l2);
  c.alpha = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.alpha = 0.1;
  c.s_schedule[2] = -0.5;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("subproblem with mu = 0 converges to a DAG") {
  Rng rng = Rng(52).child(Stream::test);
  const Matrix x = test::gaussian_matrix(rng, 100, 6);
  const auto model = make_linear_model(x);
  DagmaConfig cfg;
  cfg.lr = 1e-2;
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix w0 = test::scaled_into_domain(rng, 6, 0.8);
    const SubproblemResult r = solve_subproblem(*model, flatten(w0), 0.0, 1.0, 50000, cfg, 0);
    const Matrix w = unflatten_square(r.theta, 6);
    CHECK(h_value(w, Acyclicity::ldet(1.0)) < 1e-8);
    CHECK(test::weighted_cycle_mass(w) < 1e-6);
  }
}

TEST_CASE("subproblem keeps W near zero when l1 dominates pure noise") {
  Rng rng = Rng(53).child(Stream::test);
  const Matrix x = test::gaussian_matrix(rng, 1000, 8);
  const auto model = make_linear_model(x);
  DagmaConfig cfg;
  cfg.beta1_l1 = 0.05;
  std::vector<TraceRecord> trace;
  const SubproblemResult r = solve_subproblem(*model, Vector::Zero(64), 100.0, 1.0, 5000, cfg, 0, &trace);
  CHECK(r.theta.cwiseAbs().maxCoeff() < 0.05);
  REQUIRE_FALSE(trace.empty());
  const auto objective = [&](const Vector& t) {
    return 100.0 * (model->score(t) + cfg.beta1_l1 * model->l1_norm(t)) +
           h_value(unflatten_square(t, 8), Acyclicity::ldet(1.0));
  };
  CHECK(objective(r.theta) <= objective(Vector::Zero(64)) + 1e-9);
}

TEST_CASE("subproblem never ends above its starting objective") {
  Rng rng = Rng(54).child(Stream::test);
  const Simulation sim = linear_instance(8, 1.5, 3, 300);
  const auto model = make_linear_model(sim.data);
  DagmaConfig cfg;
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix w0 = test::scaled_into_domain(rng, 8, 0.5);
    const double mu = 0.1 * (1 + trial);
    const SubproblemResult r = solve_subproblem(*model, flatten(w0), mu, 1.0, 3000, cfg, 0);
    const auto objective = [&](const Vector& t) {
      return mu * (model->score(t) + cfg.beta1_l1 * model->l1_norm(t)) +
             h_value(unflatten_square(t, 8), Acyclicity::ldet(1.0));
    };
    CHECK(objective(r.theta) <= objective(flatten(w0)) + 1e-9);
  }
}

TEST_CASE("domain failures") {
  Rng rng = Rng(55).child(Stream::test);
  const auto model = make_linear_model(test::gaussian_matrix(rng, 50, 3));
  DagmaConfig cfg;
  // Start outside W^s.
  const Matrix cyc = test::cycle_matrix(3);
  CHECK(code_of([&] { solve_subproblem(*model, flatten(cyc), 1.0, 1.0, 10, cfg, 0); }) ==
        ErrorCode::domain_collapse);

  // Strongly coupled data, a huge step and no room to halve it.
  Matrix x(200, 2);
  for (Index i = 0; i < 200; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = x(i, 0) + 0.01 * rng.normal();
  }
  const auto coupled = make_linear_model(x);
  cfg.lr = 5.0;
  cfg.max_lr_halvings = 0;
  CHECK(code_of([&] { solve_subproblem(*coupled, Vector::Zero(4), 1000.0, 1.0, 10, cfg, 0); }) ==
        ErrorCode::domain_collapse);
}

TEST_CASE("central path bookkeeping and determinism") {
  const Simulation sim = linear_instance(8, 1.0, 5, 500);
  DagmaConfig cfg = DagmaConfig::defaults(ModelKind::linear_l2);
  cfg.inner_max_iters = {3000, 3000, 3000, 5000};
  const FitResult a = dagma_fit(sim.data, cfg);
  const FitResult b = dagma_fit(sim.data, cfg);

  REQUIRE(a.stage_mu.size() == 4);
  double mu = cfg.mu0;
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK(a.stage_mu[t] == mu);
    mu *= cfg.alpha;
  }
  int last_stage = -1;
  for (const TraceRecord& r : a.trace) {
    CHECK(std::isfinite(r.objective));
    CHECK(r.mu == a.stage_mu[static_cast<std::size_t>(r.stage)]);
    CHECK(r.s == cfg.s_schedule[static_cast<std::size_t>(r.stage)]);
    CHECK(r.stage >= last_stage);
    last_stage = r.stage;
  }

  REQUIRE(a.trace.size() == b.trace.size());
  bool identical = a.w_continuous == b.w_continuous;
  for (std::size_t i = 0; i < a.trace.size(); ++i)
    identical = identical && a.trace[i].objective == b.trace[i].objective && a.trace[i].lr == b.trace[i].lr;
  CHECK(identical);
  CHECK(a.b_thresholded == threshold(a.w_continuous, 0.3));
}

TEST_CASE("linear ER2, d = 10: near-exact recovery on most seeds") {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Simulation sim = linear_instance(10, 2.0, seed);
    const FitResult fit = dagma_fit(sim.data, DagmaConfig::defaults(ModelKind::linear_l2));
    CHECK(fit.is_dag);
    const EvalReport r = evaluate(sim.truth.binary, fit.b_thresholded);
    if (r.shd <= 2) ++good;
  }
  MESSAGE(good << " of 50 seeds with SHD <= 2");
  CHECK(good >= 40);
}

TEST_CASE("pure noise yields an almost empty graph") {
  SimulationSpec spec;
  spec.d = 10;
  spec.n = 1000;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Matrix x = sample_linear_sem(Matrix::Zero(10, 10), 1000, NoiseKind::gaussian, seed);
    const FitResult fit = dagma_fit(x, DagmaConfig::defaults(ModelKind::linear_l2));
    CHECK(fit.b_thresholded.sum() <= 2);
    CHECK(fit.is_dag);
  }
}

TEST_CASE("trailing mu = 0 stage drives h to zero") {
  const Simulation sim = linear_instance(10, 2.0, 7);
  DagmaConfig cfg = DagmaConfig::defaults(ModelKind::linear_l2);
  cfg.final_zero_mu_stage = true;
  const FitResult fit = dagma_fit(sim.data, cfg);
  CHECK(fit.stage_mu.size() == 5);
  CHECK(fit.stage_mu.back() == 0.0);
  CHECK(fit.h_final < 1e-8);
  CHECK(fit.is_dag);
}

TEST_CASE("MLP fit runs end to end") {
  SimulationSpec spec;
  spec.d = 5;
  spec.k = 1;
  spec.n = 200;
  spec.model = SemFamily::mlp;
  spec.seed = 2;
  const Simulation sim = simulate(spec);
  DagmaConfig cfg = DagmaConfig::defaults(ModelKind::mlp);
  cfg.inner_max_iters = {2000, 2000, 2000, 2000};
  const FitResult fit = dagma_fit(sim.data, cfg);
  CHECK(fit.w_continuous.rows() == 5);
  CHECK(fit.w_continuous.diagonal().isZero(0.0));
  CHECK(fit.trace.size() > 4);
}
