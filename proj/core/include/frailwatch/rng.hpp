#pragma once

#include <cstdint>
#include <random>

namespace frailwatch {

// SplitMix64 step. Used only to derive seeds for child streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic child seed for a named substream, e.g. (participant, day,
// record index). Independent work items get independent streams so parallel
// generation stays reproducible.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ULL * (a + 1);
  h ^= splitmix64(s);
  s ^= 0xc2b2ae3d27d4eb4fULL * (b + 1);
  h ^= splitmix64(s);
  s ^= 0x165667b19e3779f9ULL * (c + 1);
  h ^= splitmix64(s);
  return h;
}

using Rng = std::mt19937_64;

}  // namespace frailwatch
