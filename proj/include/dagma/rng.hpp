#pragma once

#include <cstdint>
#include <random>

namespace dagma {

/// Named random streams. Every consumer of randomness draws from
/// Rng(seed).child(stream) (and, for per-node work, .child(node)), so the
/// output of one stage never depends on how much another stage consumed.
enum class Stream : std::uint64_t {
  graph = 1,
  weights = 2,
  noise = 3,
  mlp_truth = 4,
  init = 5,
  bench = 6,
  test = 7,
};

/// Seedable 64-bit generator with portable, bit-reproducible variates.
///
/// The engine is std::mt19937_64 (fully specified by the standard). Variates
/// are derived here rather than through <random> distributions, whose
/// algorithms are implementation-defined. Child streams are seeded with
/// splitmix64(parent_seed ^ splitmix64(stream_id)).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  Rng child(std::uint64_t stream) const;
  Rng child(Stream stream) const { return child(static_cast<std::uint64_t>(stream)); }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Unbiased integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  /// Box-Muller, one variate per call.
  double normal();
  double exponential();
  /// Standard Gumbel(0, 1).
  double gumbel();
  /// Unif([-hi, -lo] ∪ [lo, hi]) with equal mass on each side.
  double signed_uniform(double lo, double hi);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace dagma
