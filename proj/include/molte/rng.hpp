#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace molte {

using Rng = std::mt19937_64;

/// Stream tags for seed derivation. Every consumer of randomness draws from
/// its own tagged child seed so that no two consumers share a stream.
enum class Stream : std::uint64_t {
  evaluation = 0x45564131,
  tuning = 0x54554e45,
  problem = 0x50524f42,
  prior = 0x5052494f,
  tank = 0x54414e4b,
  policy = 0x504f4c49,
  arm = 0x41524d53,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed of `parent` addressed by a path of counters.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(parent ^ 0x6d6f6c7465ULL);
  for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, Stream stream,
                                    std::initializer_list<std::uint64_t> path = {}) {
  std::uint64_t s = derive_seed(parent, {static_cast<std::uint64_t>(stream)});
  for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace molte
