// Copyright (c) 2026 The sconv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace sconv {

/// SplitMix64 generator. All randomness in the project flows through this
/// generator so that runs are reproducible bit for bit across platforms.
///
/// State update and output (Steele, Lea, Flood 2014):
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1): top 53 bits scaled by 2^-53.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Unbiased uniform integer in [0, bound) via modulo rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    // Accept r < M where M is the largest multiple of bound that fits in 64 bits.
    const std::uint64_t rem = (0ull - bound) % bound;  // 2^64 mod bound
    const std::uint64_t limit = 0ull - rem;            // M
    std::uint64_t r;
    do {
      r = next();
    } while (limit != 0 && r >= limit);
    return r % bound;
  }

 private:
  std::uint64_t state_;
};

/// Derives the per-stream seed for stream `index` (e.g. one stream per
/// network layer): seed XOR (index + 1) * 0x9E3779B97F4A7C15.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return seed ^ ((index + 1) * 0x9E3779B97F4A7C15ull);
}

}  // namespace sconv
