#pragma once

#include <cstdint>

namespace fpp::rng {

// 64-bit avalanche finalizer (splitmix64 constants). Bijective on uint64_t.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

// Keyed hash of a 128-bit key under a 64-bit seed. Pure function of its
// arguments; used to derive all randomness in the toolkit.
constexpr std::uint64_t hash_key(std::uint64_t seed, std::uint64_t hi,
                                 std::uint64_t lo) noexcept {
  std::uint64_t h = mix64(seed ^ 0x9e3779b97f4a7c15ull);
  h = mix64(h ^ lo);
  h = mix64(h ^ hi);
  return h;
}

// Maps 64 random bits to a uniform strictly inside (0,1).
constexpr double uniform01(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-64;
}

constexpr double uniform_for(std::uint64_t seed, std::uint64_t hi,
                             std::uint64_t lo) noexcept {
  return uniform01(hash_key(seed, hi, lo));
}

// Domain tags for the hi key word. Edge keys occupy hi < 2^44 (see
// lattice.hpp), so these cannot collide with any edge.
inline constexpr std::uint64_t kTagCoin = 0xffff000000000001ull;
inline constexpr std::uint64_t kTagDraw = 0xffff000000000002ull;
inline constexpr std::uint64_t kTagSample = 0xffff000000000003ull;

}  // namespace fpp::rng
