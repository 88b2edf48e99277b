#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace pairsim {

// All randomness flows from one 64-bit master seed. Stages derive their
// own engine through a labeled substream so that re-running a single
// stage reproduces its stream exactly.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::mt19937_64 substream(std::uint64_t seed, std::string_view label) {
  return std::mt19937_64(splitmix64(seed ^ fnv1a64(label)));
}

// Distribution transforms are hand-rolled: the mt19937_64 output sequence
// is pinned by the standard, but std::*_distribution is not, and the
// byte-identical reproducibility contract extends across toolchains.
class Rng {
 public:
  explicit Rng(std::mt19937_64 engine) : eng_(engine) {}
  Rng(std::uint64_t seed, std::string_view label) : eng_(substream(seed, label)) {}

  // uniform in [0, 1)
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // normal via Box-Muller (fresh pair each call keeps the stream simple)
  double normal(double mean = 0.0, double sigma = 1.0) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * r * std::cos(6.283185307179586 * u2);
  }

  // Poisson by inversion; means used here are all small (<= a few)
  std::uint32_t poisson(double mean) {
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint32_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= mean / k;
      cdf += p;
    }
    return k;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // number of skipped trials before the next success for success
  // probability p (geometric gap, >= 0)
  std::uint64_t geometric_gap(double p) {
    if (p >= 1.0) return 0;
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return static_cast<std::uint64_t>(std::log(u) / std::log1p(-p));
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace pairsim
