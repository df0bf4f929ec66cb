#pragma once

#include <cstdint>
#include <string_view>

#include "radionet/errors.hpp"

namespace radionet {

using Seed = std::uint64_t;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t s = a ^ (b * 0xd1b54a32d192ed03ULL);
  return splitmix64(s);
}

}  // namespace detail

// Derives an independent sub-seed, e.g. one per protocol stage.
constexpr Seed derive_seed(Seed seed, std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return detail::mix(seed, h);
}

constexpr Seed derive_seed(Seed seed, std::uint64_t index) noexcept {
  return detail::mix(seed ^ 0x5851f42d4c957f2dULL, index);
}

// Reproducible stream of uniform words for one (seed, node, round) triple.
// Construction is a handful of multiplies, so protocols create one per node
// per round; evaluation order across nodes never changes the values drawn.
class RngStream {
 public:
  constexpr RngStream(Seed seed, NodeId node, std::uint64_t round) noexcept
      : state_(detail::mix(detail::mix(seed, node), round)) {}

  constexpr std::uint64_t next() noexcept { return detail::splitmix64(state_); }

  // Uniform in [0, bound). bound must be positive.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = next();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // True with probability exactly 2^-exponent.
  constexpr bool with_prob_pow2(std::uint64_t exponent) noexcept {
    if (exponent == 0) return true;
    if (exponent >= 64) return false;
    return (next() >> (64 - exponent)) == 0;
  }

  constexpr bool coin() noexcept { return (next() >> 63) != 0; }

  double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace radionet
