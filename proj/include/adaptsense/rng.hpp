#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

namespace adaptsense {

// Seeded generator whose derived draws do not depend on the standard
// library's distribution implementations, so traces replay identically
// across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n); n must be > 0.
  std::size_t uniform_index(std::size_t n) {
    __extension__ typedef unsigned __int128 u128;
    const u128 m = static_cast<u128>(engine_()) * n;
    return static_cast<std::size_t>(m >> 64);
  }

  double normal(double mean, double sigma) {
    // Box-Muller; the cached second variate is discarded to keep draws aligned
    // one-to-one with calls.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return mean + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace adaptsense
