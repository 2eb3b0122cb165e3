#ifndef MESOBELL_RNG_HPP
#define MESOBELL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace mesobell {

// Reproducibility contract: all randomness flows from one 64-bit master seed.
// Event chunk i is generated from an independent std::mt19937_64 stream
// seeded with chunk_seed(master, i), so the output depends on (seed,
// chunk_size) only, never on how many workers ran the chunks. mt19937_64 and
// the draw functions below are fully specified, which keeps datasets
// bit-identical across platforms.

// SplitMix64 finalizer (Vigna's mix of the Murmur3/Stafford constants).
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Documented chunk-seed split: advance the master seed by (index + 1) golden
// steps' worth of offset, then mix twice.
inline std::uint64_t chunk_seed(std::uint64_t master_seed, std::uint64_t chunk_index) {
  return splitmix64(splitmix64(master_seed + 0x9e3779b97f4a7c15ull * (chunk_index + 1)));
}

// Uniform draw in (0, 1]: top 53 bits of one engine output. Zero is excluded
// so the logarithm below stays finite.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

// Inverse-transform exponential draw with the given mean.
inline double exponential_draw(std::mt19937_64& rng, double mean) {
  return -mean * std::log(uniform_unit(rng));
}

}  // namespace mesobell

#endif
