#pragma once

#include <cstdint>

#include "dyadic.hpp"

namespace dyadisc {

// splitmix64 finalizer; the standard 64-bit mix with full avalanche.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Counter-based generator: value i of stream `seed` is a pure function of
// (seed, i), so any subrange can be produced on any worker in any order.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(splitmix64(seed) ^ splitmix64(counter + 0x632be59bd9b4e019ull));
}

// Shift number `index` of a sampling stream: d coordinates on the grid Q(2^s).
inline DyadicPoint random_grid_point(std::uint64_t seed, std::uint64_t index, unsigned d,
                                     unsigned s) {
  DyadicPoint p;
  p.coords.reserve(d);
  for (unsigned j = 0; j < d; ++j)
    p.coords.push_back(
        DyadicScalar{counter_hash(seed, index * d + j) & low_bits(s), s});
  return p;
}

}  // namespace dyadisc
