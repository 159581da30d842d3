#pragma once

#include <cstdint>
#include <string_view>

namespace regula {

// Seeded, portable random stream. The generator is PCG32 (XSH-RR 64/32,
// single fixed increment), seeded through SplitMix64. Both algorithms are
// fully specified here so streams are bit-identical across platforms and
// standard libraries; nothing from <random> is used for sampling.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    state_ = splitmix64(sm);
    state_ = state_ * kMultiplier + kIncrement;
    state_ += splitmix64(sm);
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * kMultiplier + kIncrement;
    std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Unbiased bounded draw in [0, n) via rejection sampling.
  std::uint32_t bounded(std::uint32_t n) {
    if (n <= 1) return 0;
    std::uint32_t threshold = (0u - n) % n;
    for (;;) {
      std::uint32_t r = next_u32();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool chance(double p) { return next_double() < p; }

 private:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ull;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ull;
  std::uint64_t state_ = 0;
};

// FNV-1a, used to fold strings into seed material and to key error signatures.
inline std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xCBF29CE484222325ull) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

// Deterministic sub-seed derivation for campaign and experiment workers.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index = 0) {
  std::uint64_t s = master ^ fnv1a(label);
  s ^= 0x9E3779B97F4A7C15ull * (index + 1);
  std::uint64_t sm = s;
  return splitmix64(sm);
}

}  // namespace regula
