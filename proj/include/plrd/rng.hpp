#pragma once

#include <array>
#include <cstdint>

#include "plrd/stats.hpp"

namespace plrd {
namespace rng {

//! Counter-based random numbers built on Philox4x32-10 (Salmon et al., 2011).
//!
//! Every variate is a pure function of (key, counter):
//!   key     = 64-bit seed split into two 32-bit words
//!   counter = (c0, c1, c2, c3), four 32-bit words
//! The 128-bit block is produced by ten rounds of the standard Philox round
//! function with multipliers 0xD2511F53 / 0xCD9E8D57 and Weyl constants
//! 0x9E3779B9 / 0xBB67AE85. Streams used by this library:
//!   uniform_at(seed, stream, index): block (index, stream, 0, 0), lanes 0-1
//! This makes every draw reproducible from (seed, stream, index) alone, in any
//! language with an ordinary Philox implementation.
struct Philox {
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

inline std::array<std::uint32_t, 2> split_seed(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed & 0xFFFFFFFFu),
          static_cast<std::uint32_t>(seed >> 32)};
}

//! Uniform draw on (0, 1), strictly excluding both endpoints.
inline double uniform_at(std::uint64_t seed, std::uint32_t stream, std::uint64_t index) {
  const auto out = Philox::block({static_cast<std::uint32_t>(index & 0xFFFFFFFFu),
                                  static_cast<std::uint32_t>(index >> 32), stream, 0u},
                                 split_seed(seed));
  const std::uint64_t bits = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  // 53 significant bits, centered in the cell: u in [2^-54, 1 - 2^-54].
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream, std::uint64_t index) {
  const auto out = Philox::block({static_cast<std::uint32_t>(index & 0xFFFFFFFFu),
                                  static_cast<std::uint32_t>(index >> 32), stream, 0x5eedu},
                                 split_seed(seed));
  return (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
}

//! Standard normal draw via the inverse CDF (AS 241).
inline double normal_at(std::uint64_t seed, std::uint32_t stream, std::uint64_t index) {
  return stats::normal_quantile(uniform_at(seed, stream, index));
}

//! Beta(a, b) draw via the inverse CDF of the regularized incomplete beta.
inline double beta_at(std::uint64_t seed, std::uint32_t stream, std::uint64_t index,
                      double a, double b) {
  return stats::beta_quantile(a, b, uniform_at(seed, stream, index));
}

} // namespace rng
} // namespace plrd
