#pragma once

#include <cstdint>
#include <random>

namespace simcheck {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Child stream keyed by (master seed, stream index, sub-stream). The key, not
// the order in which streams are requested, determines the sequence.
inline Rng child_rng(std::uint64_t master, std::uint64_t stream, std::uint64_t sub = 0) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
  s = splitmix64(s ^ splitmix64(sub + 0x8CB92BA72F3D8DD7ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return Rng(seq);
}

}  // namespace simcheck
