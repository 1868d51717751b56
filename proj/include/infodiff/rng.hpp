#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

// Seeding and portable uniform draws. std::uniform_int_distribution and
// friends are implementation-defined, so every draw that affects results
// goes through the helpers below; only the engine itself comes from <random>
// (mt19937_64 output is fully specified by the standard).

namespace infodiff::rng {

// SplitMix64 finalizer (Steele, Lea & Flood 2014), used to whiten seeds and
// derive decorrelated per-stream seeds from a base seed plus integer tags.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic stream derivation: chain-hash the base seed with tags.
// Order-sensitive: derive_seed(s, {a,b}) != derive_seed(s, {b,a}).
inline uint64_t derive_seed(uint64_t base, std::initializer_list<uint64_t> tags) {
  uint64_t h = splitmix64(base);
  for (uint64_t t : tags) h = splitmix64(h ^ (t + 0x9e3779b97f4a7c15ULL));
  return h;
}

inline std::mt19937_64 make_engine(uint64_t seed) {
  return std::mt19937_64(splitmix64(seed));
}

// Unbiased integer in [0, n) by rejection. n must be nonzero.
inline uint64_t uniform_below(std::mt19937_64& g, uint64_t n) {
  const uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    uint64_t r = g();
    if (r >= threshold) return r % n;
  }
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

}  // namespace infodiff::rng
