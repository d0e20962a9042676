#pragma once

#include <cstdint>
#include <random>

namespace d2d {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream). Different streams of one seed
/// are used for topology placement, fading and learning decisions.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

namespace stream {
inline constexpr std::uint64_t placement = 0;
inline constexpr std::uint64_t shadowing = 1;
inline constexpr std::uint64_t fading = 2;
inline constexpr std::uint64_t utility = 3;
inline constexpr std::uint64_t potential = 4;
inline constexpr std::uint64_t learning = 10;
}  // namespace stream

}  // namespace d2d
