#pragma once

#include <cstdint>
#include <limits>

namespace ordreg {

/// xoshiro256** seeded through SplitMix64 from (seed, stream). Distinct
/// streams of one seed are independent sequences; every task that draws
/// random numbers owns its own stream.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Uniform integer in [0, n), n > 0, without modulo bias.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal by inversion.
  double normal();

 private:
  std::uint64_t s_[4];
};

}  // namespace ordreg
