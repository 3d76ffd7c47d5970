#pragma once

#include <cstdint>
#include <random>

namespace itmlab {

/// Seeded stream of uniform doubles. mt19937_64 and seed_seq are fully
/// specified by the standard, so a (seed, stream) pair reproduces the same
/// values on every conforming platform.
class SeededUniform {
 public:
  explicit SeededUniform(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace itmlab
