#pragma once

#include <cstdint>
#include <random>

namespace scenediff {

// Deterministic random source. All randomized code in this project draws from
// an explicitly seeded Rng; distributions are implemented on top of the raw
// engine output so that a given seed produces the same stream everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive. Rejection sampling keeps it unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal via Box-Muller on raw engine bits.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Derive an independent generator for a named substream.
  Rng fork(std::uint64_t stream);

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

 private:
  std::mt19937_64 engine_;
};

}  // namespace scenediff
