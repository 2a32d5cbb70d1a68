#pragma once

#include <cstdint>
#include <initializer_list>

namespace incflow {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based stream splitting: every (seed, counters...) tuple gets an
// independent 64-bit seed.
template <typename... Counters>
std::uint64_t derive_seed(std::uint64_t seed, Counters... counters) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t c : {static_cast<std::uint64_t>(counters)...}) {
    h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  }
  return h;
}

}  // namespace incflow
