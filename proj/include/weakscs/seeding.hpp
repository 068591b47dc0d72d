#pragma once

#include <cstdint>

namespace weakscs {

/// Seed of the independent stream `index` under `master`.
///
/// x = master + (index + 1) * 0x9E3779B97F4A7C15 (mod 2^64), then the
/// SplitMix64 finalizer:
///   x ^= x >> 30; x *= 0xBF58476D1CE4E5B9;
///   x ^= x >> 27; x *= 0x94D049BB133111EB;
///   x ^= x >> 31.
/// Both stages are bijections of 64-bit words, so for a fixed master the map
/// is injective over all indices. The constants are part of the output
/// format and must not change.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace weakscs
