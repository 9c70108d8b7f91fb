#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace xorlab {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a; used to turn purpose tags into 64-bit keys.
inline constexpr std::uint64_t tag_hash(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Deterministic pseudorandom stream keyed by (seed, purpose tag, index).
///
/// Two streams with different keys are statistically independent, and a
/// stream's output depends only on its key, so draws made per constraint or
/// per trial do not depend on the order in which they are requested.
/// Satisfies UniformRandomBitGenerator, but the helpers below are used for
/// all distributions so outputs are identical across standard libraries.
class KeyedStream {
 public:
  using result_type = std::uint64_t;

  KeyedStream(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) noexcept
      : state_(splitmix64(splitmix64(seed ^ splitmix64(tag_hash(tag))) + index * 0xd1342543de82ef95ULL)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) by Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    __uint128_t m = static_cast<__uint128_t>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<__uint128_t>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  // +1 with probability (1 + bias) / 2, else -1.
  int rademacher(double bias) noexcept { return uniform() < 0.5 * (1.0 + bias) ? 1 : -1; }

  // Derived child stream; lets one keyed stream seed a family of independent ones.
  KeyedStream fork(std::string_view tag, std::uint64_t index = 0) noexcept {
    return KeyedStream((*this)(), tag, index);
  }

 private:
  std::uint64_t state_;
};

}  // namespace xorlab
