#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rue {

// Counter-free splitmix64 stream. Chosen over std::mt19937_64 +
// std::*_distribution because the standard distributions are
// implementation-defined; every draw here is a fixed sequence of IEEE-754
// operations, so simulations replay bit-identically everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second deviate is discarded so a
  // draw consumes a fixed number of stream words.
  double next_normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  bool next_bernoulli(double p) { return next_double() < p; }

 private:
  std::uint64_t state_;
};

// Mixes one 64-bit word into a stream key (splitmix64 finalizer over a
// running hash). Part of the frozen reproducibility contract: child streams
// in the experiment engine are derived exclusively through this function.
inline std::uint64_t mix_stream_key(std::uint64_t key, std::uint64_t word) {
  std::uint64_t z = key + 0x9e3779b97f4a7c15ULL + word;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <typename... Words>
std::uint64_t derive_stream_key(std::uint64_t base_seed, Words... words) {
  std::uint64_t key = mix_stream_key(0x2545f4914f6cdd1dULL, base_seed);
  ((key = mix_stream_key(key, static_cast<std::uint64_t>(words))), ...);
  return key;
}

}  // namespace rue
