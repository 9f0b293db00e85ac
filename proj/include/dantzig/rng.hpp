#pragma once

#include <cstdint>
#include <random>

namespace dantzig {

/// Seeded stream with a platform-independent mapping from integers to
/// doubles. std::*_distribution is avoided because its output is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  /// Uniform on (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52;
  }
  /// Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal by the Marsaglia polar method.
  double normal();
  /// +1 or -1 with probability 1/2.
  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }
  /// Standard Cauchy by the inverse CDF tan(pi (u - 1/2)).
  double cauchy();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Child seed k of a master seed; independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k);

}  // namespace dantzig
