#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ranla {

// Deterministic PRNG used throughout the simulator and the learner.
//
// The generator is SplitMix64. Besides a sequential stream it supports cheap
// keyed construction via hash_seed(), which lets the simulator draw channel
// randomness as a pure function of (seed, purpose, entity, tti). Draws are
// then independent of evaluation order, which keeps multi-policy runs on the
// same scenario paired to identical channel realizations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(next_u64() % span);
  }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Poisson count by inversion; intended for the small rates used here.
  int poisson(double lambda) {
    double p = std::exp(-lambda);
    double cdf = p;
    double u = uniform();
    int k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= lambda / k;
      cdf += p;
    }
    return k;
  }

  template <typename T>
  const T& pick(const std::vector<T>& values) {
    if (values.empty()) throw std::invalid_argument("pick: empty value set");
    return values[static_cast<size_t>(uniform_int(0, static_cast<int64_t>(values.size()) - 1))];
  }

 private:
  uint64_t state_;
};

// Mixes an arbitrary key tuple into a well-distributed 64-bit seed.
inline uint64_t hash_seed(uint64_t a) {
  a += 0x9e3779b97f4a7c15ull;
  a = (a ^ (a >> 30)) * 0xbf58476d1ce4e5b9ull;
  a = (a ^ (a >> 27)) * 0x94d049bb133111ebull;
  return a ^ (a >> 31);
}

template <typename... Rest>
inline uint64_t hash_seed(uint64_t a, uint64_t b, Rest... rest) {
  uint64_t h = hash_seed(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
  if constexpr (sizeof...(rest) == 0)
    return h;
  else
    return hash_seed(h, rest...);
}

// Stable tags for the independent random streams of a simulation.
namespace stream {
inline constexpr uint64_t kShadow = 1;
inline constexpr uint64_t kFading = 2;
inline constexpr uint64_t kCollision = 3;
inline constexpr uint64_t kBlock = 4;
inline constexpr uint64_t kTraffic = 5;
inline constexpr uint64_t kDirection = 6;
inline constexpr uint64_t kPolicy = 7;
inline constexpr uint64_t kPreference = 8;
inline constexpr uint64_t kScenario = 9;
inline constexpr uint64_t kInit = 10;
inline constexpr uint64_t kLearner = 11;
}  // namespace stream

}  // namespace ranla
