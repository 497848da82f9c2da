#include "dagma/rng.hpp"

#include <cmath>
#include <numbers>

namespace dagma {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::child(std::uint64_t stream) const { return Rng(splitmix64(seed_ ^ splitmix64(stream))); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection on the top of the range keeps the result unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential() { return -std::log(1.0 - uniform()); }

double Rng::gumbel() {
  double u = uniform();
  while (u == 0.0) u = uniform();
  return -std::log(-std::log(u));
}

double Rng::signed_uniform(double lo, double hi) {
  const double magnitude = uniform(lo, hi);
  return bernoulli(0.5) ? -magnitude : magnitude;
}

}  // namespace dagma
