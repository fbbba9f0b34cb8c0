#pragma once

#include <cstdint>
#include <random>

namespace tcg {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream seed for (base seed, purpose, item index). Per-item
// streams keep parallel stages independent of worker count.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

namespace streams {
inline constexpr std::uint64_t kLSystem = 0x4c53;
inline constexpr std::uint64_t kNodeNoise = 0x4e4f;
inline constexpr std::uint64_t kValidationNoise = 0x564e;
inline constexpr std::uint64_t kShuffle = 0x5348;
inline constexpr std::uint64_t kInit = 0x494e;
inline constexpr std::uint64_t kSplit = 0x5350;
}  // namespace streams

}  // namespace tcg
