#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace bayessum {

/// Counter-based 64-bit generator.
///
/// Output i of a stream with key k is splitmix64_mix(k + (i + 1) * 0x9E3779B97F4A7C15),
/// where splitmix64_mix is the SplitMix64 finalizer. The stream is fully
/// determined by (key, counter), so any language can reproduce it bit for bit.
/// Derived streams use key' = splitmix64_mix(key ^ splitmix64_mix(stream_id)).
class Rng {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit constexpr Rng(std::uint64_t seed = 0) : key_(mix(seed)) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
  }

  /// Independent child stream; does not advance this generator.
  [[nodiscard]] constexpr Rng split(std::uint64_t stream_id) const {
    Rng child;
    child.key_ = mix(key_ ^ mix(stream_id + kGolden));
    return child;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  /// Uniform integer in [0, n) by rejection (unbiased).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t r;
    do {
      r = (*this)();
    } while (r >= limit);
    return r % n;
  }

  /// Standard normal via Box-Muller (one draw per pair of uniforms).
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  [[nodiscard]] constexpr std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace bayessum
