#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "stid/matrix.hpp"

namespace stid {

/// xoshiro256** with its 256-bit state expanded from a 64-bit seed by SplitMix64.
///
/// Only integer arithmetic is used to advance the state, so a given seed yields
/// the same stream on every platform. Derived quantities (uniform doubles,
/// shuffles, bounded integers) are built on top with fixed, portable rules;
/// std:: distributions are avoided because their algorithms are unspecified.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream keyed by (seed, name); used so that a tensor's
  /// initial values depend only on its name and the seed.
  static Rng substream(std::uint64_t seed, std::string_view name);

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept;
  /// Standard normal via Box-Muller (one draw per call).
  double normal() noexcept;
  /// Uniform integer in [0, bound), bound > 0, rejection-sampled without bias.
  std::uint64_t below(std::uint64_t bound) noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

/// SplitMix64 finalizer; advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// (fan_out x fan_in) matrix with entries uniform in [-a, a], a = sqrt(6 / (fan_in + fan_out)).
Matrix init_glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// (rows x cols) matrix with entries uniform in [-bound, bound].
Matrix init_uniform(std::size_t rows, std::size_t cols, double bound, Rng& rng);

}  // namespace stid
