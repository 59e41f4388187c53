#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mtsr {

// All stochastic choices (initial states, reduction outcomes) draw from one
// run-owned stream.
using Rng = std::mt19937_64;
inline constexpr std::string_view kRngName = "mt19937_64";

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

// SplitMix64 finalizer, used to derive independent per-run seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of replicate `index` under `master`: splitmix64(master + index * golden).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + index * 0x9e3779b97f4a7c15ULL);
}

}  // namespace mtsr
