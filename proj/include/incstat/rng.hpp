// rng.hpp
//
// Seeding scheme. Every random stream is identified by a master seed and a
// path of counters (e.g. {mu index, realization index}); the stream seed is
//
//   h0 = splitmix64(master), h_{j+1} = splitmix64(h_j ^ splitmix64(c_j + j + 1))
//
// so a realization's draws depend only on (master, path), never on which
// worker produced it or in what order.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace incstat {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(master);
  std::uint64_t j = 1;
  for (std::uint64_t c : path) h = splitmix64(h ^ splitmix64(c + j++));
  return h;
}

// Uniform double in [0, 1) from the top 53 bits of a hash.
constexpr double hash_uniform(std::uint64_t key, std::uint64_t counter) {
  const std::uint64_t h = splitmix64(key ^ splitmix64(counter));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

}  // namespace incstat
