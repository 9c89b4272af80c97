#pragma once

// Seeded random streams that are bit-reproducible across platforms:
// std::mt19937_64 is fully specified by the standard, and every variate below
// is derived from its raw 64-bit output with our own transforms (the standard
// distributions are implementation-defined and are never used).

#include <cstdint>
#include <random>
#include <vector>

namespace kc {

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Standard normal quantile (Wichura's AS241, relative accuracy ~1e-16).
double normal_quantile(double p);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(mix_seed(seed, stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on {0, ..., n-1} by rejection (no modulo bias).
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal by inversion of the CDF at an open-interval uniform.
  double normal();

  /// `count` distinct indices from {0, ..., n-1} (partial Fisher-Yates), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

 private:
  std::mt19937_64 engine_;
};

}  // namespace kc
