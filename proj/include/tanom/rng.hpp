// Self-contained deterministic RNG (splitmix64). Standard-library
// distributions are not bit-stable across implementations, and every artifact
// here (datasets, weights, shuffles, view sampling) must reproduce bitwise
// from its seed.

#pragma once

#include <cstdint>

namespace tanom {

// Mixes a base seed with a stream id so that independent consumers
// (shuffling, augmentation, init, data synthesis) never share a stream.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Unbiased integer in [0, n), n >= 1 (Lemire's method).
  std::uint64_t uniform_below(std::uint64_t n);
  // Inclusive range.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal via Box-Muller; caches the second variate.
  double gaussian();

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tanom
