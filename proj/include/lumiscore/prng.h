#pragma once

#include <cstdint>

namespace lumiscore {

/// SplitMix64 (Steele, Lea & Flood; Vigna's constants). Every stochastic
/// path draws from this generator so outputs are reproducible bit for bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// next() / 2^64 as a double.
  double unit() noexcept { return static_cast<double>(next()) * 0x1p-64; }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace lumiscore
