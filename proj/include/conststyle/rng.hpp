#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace conststyle {

// splitmix64 finalizer; used to derive independent stream seeds from one
// run seed so that consuming one stream never perturbs another.
constexpr std::uint64_t mix_seed(std::uint64_t state) {
  std::uint64_t z = state + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

// Deterministic RNG. Distributions are implemented here rather than with
// <random>'s distribution templates, whose output is implementation-defined;
// mt19937_64 itself is fully specified by the standard, so every draw is
// bit-identical across platforms and runs.
class RngState {
 public:
  explicit RngState(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53 bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n); rejection sampling.
  std::uint64_t bounded(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~0ULL - ~0ULL % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // Standard normal via Box-Muller. No cached spare: two uniforms per draw,
  // so the consumption pattern is a fixed function of the call count.
  double normal() {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Fisher-Yates; unlike std::shuffle this is pinned to the mt19937_64 stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(bounded(i))]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace conststyle
