// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace risfa {

// splitmix64 finalizer. All seed derivation in the project goes through this
// mix so that an alternate-language implementation can reproduce every stream
// bit-for-bit from the master seed.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Child stream seed: parent seed combined with a stream index.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index));
}

// Seed for Monte Carlo work item (snr_index, trial_index) under a master seed.
// Fixed two-level chain, so single trials can be re-run in isolation.
constexpr std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t snr_index,
                                   std::uint64_t trial_index) noexcept {
  return derive_seed(derive_seed(master_seed, snr_index), trial_index);
}

// Sub-stream indices hung off a trial seed (see derive_seed).
inline constexpr std::uint64_t kStreamGeneration = 1;  // channels, schedule, symbols
inline constexpr std::uint64_t kStreamNoise = 2;       // AWGN draws
inline constexpr std::uint64_t kStreamReceiver = 3;    // TALS random initialization

/// Deterministic random source: std::mt19937_64 engine (bit-exact per the C++
/// standard) with hand-written output transforms, because the std
/// distribution adapters are implementation-defined and would break
/// cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), n >= 1, by rejection sampling.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  // Standard real normal via Box-Muller (cosine branch, two draws consumed).
  double gaussian() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Circularly-symmetric complex normal CN(0, 1): E|z|^2 = 1.
  std::complex<double> cgaussian() {
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-std::log(u1));
    return {r * std::cos(2.0 * std::numbers::pi * u2),
            r * std::sin(2.0 * std::numbers::pi * u2)};
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace risfa
