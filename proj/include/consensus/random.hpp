#pragma once

#include <cstdint>
#include <random>

namespace consensus {

using Rng = std::mt19937_64;

/// One splitmix64 finalisation step.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for an independent, reproducible substream. Each coordinate is folded
/// through a full splitmix round, so neighbouring indices give unrelated seeds.
std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                 std::uint64_t realization_index,
                                 std::uint64_t instrument_count) noexcept;

/// Convenience: an engine seeded from a derived stream seed.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t a,
                       std::uint64_t b) {
  return Rng(derive_stream_seed(master_seed, a, b));
}

}  // namespace consensus
