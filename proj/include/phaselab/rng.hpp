// Copyright (c) 2026 Phaselab Contributors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace phaselab::rng {

// SplitMix64 finalizer. Stable across platforms; used both as the
// per-trial seed mixer and as the counter-based stream function.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Folds `value` into `seed`, producing a new independent stream key.
constexpr std::uint64_t combine(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ (mix64(value) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

/// Counter-based random stream: draw i is a pure function of (key, i).
/// Distinct purposes derive distinct keys via substream(), so changing the
/// number of draws consumed by one purpose never shifts another.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}

  Stream substream(std::uint64_t tag) const { return Stream(combine(key_, tag)); }

  std::uint64_t next_u64() { return mix64(key_ ^ mix64(counter_++)); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal draw (Box-Muller, cosine branch; two uniforms per draw).
  double gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Unbiased integer in [0, n), n >= 1. Rejection keeps the map exact.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  bool coin() { return (next_u64() & 1u) != 0; }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Uniformly random k-subset of {0,...,m-1} (Floyd's algorithm), sorted.
std::vector<std::int64_t> sample_distinct(Stream& stream, std::uint64_t m, std::uint64_t k);

}  // namespace phaselab::rng
