#pragma once

// Synthetic ground-truth DAGs and observational data for the linear,
// logistic and MLP structural equation models. Every sampler is a pure
// function of its arguments and seed.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dagma/matrix.hpp"

namespace dagma {

enum class GraphFamily { er, sf };
enum class NoiseKind { gaussian, exponential, gumbel };
enum class SemFamily { linear, logistic, mlp };

std::string_view to_string(GraphFamily f);
std::string_view to_string(NoiseKind n);
std::string_view to_string(SemFamily f);
std::optional<GraphFamily> parse_graph_family(std::string_view s);
std::optional<NoiseKind> parse_noise_kind(std::string_view s);
std::optional<SemFamily> parse_sem_family(std::string_view s);

/// Erdős–Rényi DAG with k*d expected edges: a random vertex order, then each
/// order-respecting pair independently with p = min(1, 2k/(d-1)).
/// Throws Error(infeasible_density) when d < 2, k <= 0 or 2k/(d-1) > 2.
Adjacency sample_er_dag(Index d, double k, std::uint64_t seed);

/// Scale-free DAG by Price-style preferential attachment: the t-th arriving
/// node (t = 0, 1, ...) links to min(k, t) distinct earlier nodes chosen with
/// probability proportional to in-degree + 1. Labels are randomly permuted.
Adjacency sample_sf_dag(Index d, int k, std::uint64_t seed);

/// Independent Unif([-2, -0.5] ∪ [0.5, 2]) weight on every edge of b.
Matrix assign_weights(const Adjacency& b, std::uint64_t seed);

/// n samples of x_j = w_j^T x + z_j in topological order (X = Z (I - W)^{-1}).
/// Throws Error(cyclic_input) when the support of w has a cycle.
Matrix sample_linear_sem(const Matrix& w, Index n, NoiseKind noise, std::uint64_t seed);

/// x_j ~ Bernoulli(sigmoid(w_j^T x)); entries are exactly 0 or 1.
Matrix sample_logistic_sem(const Matrix& w, Index n, std::uint64_t seed);

/// x_j = sigmoid(x_pa(j) W1_j) w2_j + z_j with z_j ~ N(0, 1). W1_j is
/// |pa(j)| x hidden, w2_j has length hidden; both drawn from the edge-weight
/// distribution.
Matrix sample_mlp_sem(const Adjacency& b, Index n, std::uint64_t seed, Index hidden = 100);

struct SimulationSpec {
  GraphFamily graph = GraphFamily::er;
  double k = 2.0;
  Index d = 10;
  Index n = 1000;
  SemFamily model = SemFamily::linear;
  NoiseKind noise = NoiseKind::gaussian;
  std::uint64_t seed = 0;
};

struct GroundTruth {
  Adjacency binary;
  /// Edge weights for linear / logistic; the 0/1 pattern for mlp.
  Matrix weights;
  SimulationSpec spec;
};

struct Simulation {
  GroundTruth truth;
  Matrix data;  // n x d
};

Simulation simulate(const SimulationSpec& spec);

}  // namespace dagma
