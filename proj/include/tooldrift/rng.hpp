#pragma once

// Seeded choices that are stable across platforms and standard libraries.
//
// All stochastic decisions in the library go through these helpers. The
// engine is std::mt19937_64 (its output sequence is fixed by the standard);
// bounded integers are drawn with rejection sampling instead of
// std::uniform_int_distribution, whose algorithm is implementation-defined.
// Seeds for independent streams are derived with the SplitMix64 finalizer
// over an FNV-1a hash of a textual salt.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace tooldrift {

inline std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt) noexcept {
  return mix_seed(seed, fnv1a(salt));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % bound);
  }

  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

/// One-shot uniform choice in [0, n) keyed by (seed, salt).
inline std::size_t pick_index(std::uint64_t seed, std::string_view salt, std::size_t n) {
  Rng rng(mix_seed(seed, salt));
  return rng.index(n);
}

}  // namespace tooldrift
