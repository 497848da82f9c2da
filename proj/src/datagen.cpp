#include "dagma/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "dagma/error.hpp"
#include "dagma/rng.hpp"
#include "dagma/score.hpp"

namespace dagma {

namespace {

std::vector<Index> random_permutation(Index d, Rng& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = d - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

std::vector<Index> order_or_throw(const Adjacency& b) {
  auto order = topological_order(b);
  if (!order) throw Error(ErrorCode::cyclic_input, "ground-truth graph has a cycle");
  return *order;
}

Adjacency support(const Matrix& w) {
  if (w.rows() != w.cols()) throw Error(ErrorCode::dimension_mismatch, "W must be square");
  return (w.array() != 0.0).cast<int>();
}

double draw_noise(Rng& rng, NoiseKind kind) {
  switch (kind) {
    case NoiseKind::gaussian: return rng.normal();
    case NoiseKind::exponential: return rng.exponential();
    case NoiseKind::gumbel: return rng.gumbel();
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(GraphFamily f) { return f == GraphFamily::er ? "er" : "sf"; }

std::string_view to_string(NoiseKind n) {
  switch (n) {
    case NoiseKind::gaussian: return "gauss";
    case NoiseKind::exponential: return "exp";
    case NoiseKind::gumbel: return "gumbel";
  }
  return "gauss";
}

std::string_view to_string(SemFamily f) {
  switch (f) {
    case SemFamily::linear: return "linear";
    case SemFamily::logistic: return "logistic";
    case SemFamily::mlp: return "mlp";
  }
  return "linear";
}

std::optional<GraphFamily> parse_graph_family(std::string_view s) {
  if (s == "er") return GraphFamily::er;
  if (s == "sf") return GraphFamily::sf;
  return std::nullopt;
}

std::optional<NoiseKind> parse_noise_kind(std::string_view s) {
  if (s == "gauss" || s == "gaussian") return NoiseKind::gaussian;
  if (s == "exp" || s == "exponential") return NoiseKind::exponential;
  if (s == "gumbel") return NoiseKind::gumbel;
  return std::nullopt;
}

std::optional<SemFamily> parse_sem_family(std::string_view s) {
  if (s == "linear") return SemFamily::linear;
  if (s == "logistic") return SemFamily::logistic;
  if (s == "mlp") return SemFamily::mlp;
  return std::nullopt;
}

Adjacency sample_er_dag(Index d, double k, std::uint64_t seed) {
  if (d < 2 || !(k > 0.0) || 2.0 * k / static_cast<double>(d - 1) > 2.0) {
    throw Error(ErrorCode::infeasible_density, "ER" + std::to_string(k) + " is infeasible for d = " +
                                                   std::to_string(d));
  }
  const double p = std::min(1.0, 2.0 * k / static_cast<double>(d - 1));
  Rng rng = Rng(seed).child(Stream::graph);
  const std::vector<Index> perm = random_permutation(d, rng);
  Adjacency b = Adjacency::Zero(d, d);
  for (Index a = 0; a < d; ++a) {
    for (Index c = a + 1; c < d; ++c) {
      if (rng.bernoulli(p)) b(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(c)]) = 1;
    }
  }
  return b;
}

Adjacency sample_sf_dag(Index d, int k, std::uint64_t seed) {
  if (d < 2 || k < 1) {
    throw Error(ErrorCode::infeasible_density, "SF graph needs d >= 2 and k >= 1");
  }
  Rng rng = Rng(seed).child(Stream::graph);
  Adjacency arrival = Adjacency::Zero(d, d);
  std::vector<double> attractiveness(static_cast<std::size_t>(d), 1.0);  // in-degree + 1
  std::vector<Index> candidates;
  for (Index t = 1; t < d; ++t) {
    candidates.resize(static_cast<std::size_t>(t));
    std::iota(candidates.begin(), candidates.end(), Index{0});
    const Index m = std::min<Index>(k, t);
    for (Index draw = 0; draw < m; ++draw) {
      double total = 0.0;
      for (Index c : candidates) total += attractiveness[static_cast<std::size_t>(c)];
      double u = rng.uniform() * total;
      std::size_t pick = candidates.size() - 1;
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        u -= attractiveness[static_cast<std::size_t>(candidates[i])];
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
      const Index target = candidates[pick];
      candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
      arrival(t, target) = 1;
    }
    // Degrees update only after the node has finished attaching.
    for (Index target = 0; target < t; ++target)
      if (arrival(t, target)) attractiveness[static_cast<std::size_t>(target)] += 1.0;
  }

  const std::vector<Index> label = random_permutation(d, rng);
  Adjacency b = Adjacency::Zero(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      if (arrival(i, j)) b(label[static_cast<std::size_t>(i)], label[static_cast<std::size_t>(j)]) = 1;
  return b;
}

Matrix assign_weights(const Adjacency& b, std::uint64_t seed) {
  Rng rng = Rng(seed).child(Stream::weights);
  Matrix w = Matrix::Zero(b.rows(), b.cols());
  for (Index i = 0; i < b.rows(); ++i)
    for (Index j = 0; j < b.cols(); ++j)
      if (b(i, j) != 0) w(i, j) = rng.signed_uniform(0.5, 2.0);
  return w;
}

Matrix sample_linear_sem(const Matrix& w, Index n, NoiseKind noise, std::uint64_t seed) {
  const std::vector<Index> order = order_or_throw(support(w));
  const Index d = w.rows();
  const Rng noise_root = Rng(seed).child(Stream::noise);
  Matrix x = Matrix::Zero(n, d);
  for (Index j : order) {
    Rng rng = noise_root.child(static_cast<std::uint64_t>(j));
    for (Index i = 0; i < n; ++i) x(i, j) = draw_noise(rng, noise);
    for (Index p = 0; p < d; ++p)
      if (w(p, j) != 0.0) x.col(j) += w(p, j) * x.col(p);
  }
  return x;
}

Matrix sample_logistic_sem(const Matrix& w, Index n, std::uint64_t seed) {
  const std::vector<Index> order = order_or_throw(support(w));
  const Index d = w.rows();
  const Rng noise_root = Rng(seed).child(Stream::noise);
  Matrix x = Matrix::Zero(n, d);
  for (Index j : order) {
    Rng rng = noise_root.child(static_cast<std::uint64_t>(j));
    Vector logits = Vector::Zero(n);
    for (Index p = 0; p < d; ++p)
      if (w(p, j) != 0.0) logits += w(p, j) * x.col(p);
    for (Index i = 0; i < n; ++i) x(i, j) = rng.bernoulli(sigmoid(logits[i])) ? 1.0 : 0.0;
  }
  return x;
}

Matrix sample_mlp_sem(const Adjacency& b, Index n, std::uint64_t seed, Index hidden) {
  const std::vector<Index> order = order_or_throw(b);
  const Index d = b.rows();
  const Rng noise_root = Rng(seed).child(Stream::noise);
  const Rng truth_root = Rng(seed).child(Stream::mlp_truth);
  Matrix x = Matrix::Zero(n, d);
  for (Index j : order) {
    Rng rng = noise_root.child(static_cast<std::uint64_t>(j));
    for (Index i = 0; i < n; ++i) x(i, j) = rng.normal();

    std::vector<Index> parents;
    for (Index p = 0; p < d; ++p)
      if (b(p, j) != 0) parents.push_back(p);
    if (parents.empty()) continue;

    Rng wrng = truth_root.child(static_cast<std::uint64_t>(j));
    const auto np = static_cast<Index>(parents.size());
    Matrix w1(np, hidden);
    for (Index r = 0; r < np; ++r)
      for (Index c = 0; c < hidden; ++c) w1(r, c) = wrng.signed_uniform(0.5, 2.0);
    Vector w2(hidden);
    for (Index c = 0; c < hidden; ++c) w2[c] = wrng.signed_uniform(0.5, 2.0);

    Matrix xp(n, np);
    for (Index r = 0; r < np; ++r) xp.col(r) = x.col(parents[static_cast<std::size_t>(r)]);
    Matrix h = xp * w1;
    h = h.unaryExpr([](double z) { return sigmoid(z); });
    x.col(j) += h * w2;
  }
  return x;
}

Simulation simulate(const SimulationSpec& spec) {
  Simulation out;
  out.truth.spec = spec;
  out.truth.binary = spec.graph == GraphFamily::er
                         ? sample_er_dag(spec.d, spec.k, spec.seed)
                         : sample_sf_dag(spec.d, static_cast<int>(std::lround(spec.k)), spec.seed);
  switch (spec.model) {
    case SemFamily::linear:
      out.truth.weights = assign_weights(out.truth.binary, spec.seed);
      out.data = sample_linear_sem(out.truth.weights, spec.n, spec.noise, spec.seed);
      break;
    case SemFamily::logistic:
      out.truth.weights = assign_weights(out.truth.binary, spec.seed);
      out.data = sample_logistic_sem(out.truth.weights, spec.n, spec.seed);
      break;
    case SemFamily::mlp:
      out.truth.weights = out.truth.binary.cast<double>();
      out.data = sample_mlp_sem(out.truth.binary, spec.n, spec.seed);
      break;
  }
  return out;
}

}  // namespace dagma
