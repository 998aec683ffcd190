// hyda/rng.hpp — seeded, counter-based random number generation.
//
// The generator is splitmix64: state advances by a fixed odd constant
// (a counter in disguise), outputs are a finalizing mix of the state.
// Identical seeds therefore yield identical streams on every platform,
// and independent streams are derived by hashing (seed, stream-id), so
// data generation, initialization and shuffling never share a stream.
#pragma once

#include "hyda/types.hpp"

#include <cmath>
#include <cstdint>

namespace hyda {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // splitmix64 step.
  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // One Gaussian draw via Box-Muller: z = sqrt(-2 ln u1) * cos(2 pi u2),
  // consuming exactly two uniforms. u1 is shifted away from zero.
  double next_gaussian(double mean, double stddev) {
    const double u1 = 1.0 - next_uniform();  // (0, 1]
    const double u2 = next_uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    return mean + stddev * z;
  }

  // Index in [0, n). Rejection-free modulo is fine at our stream lengths.
  Index next_index(Index n) {
    return static_cast<Index>(next_u64() % static_cast<std::uint64_t>(n));
  }

  // Independent stream keyed by (seed, stream). fork(k) == fork(k) always;
  // the derivation is the splitmix64 finalizer over seed ^ (phi64 * (k+1)).
  Rng fork(std::uint64_t stream) const {
    std::uint64_t z = seed_ ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return Rng(z ^ (z >> 31));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace hyda
