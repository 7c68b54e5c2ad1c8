#pragma once

#include <cstdint>
#include <random>

namespace rotorbar {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to turn (seed, stream index) pairs into
/// well-mixed, independent sub-seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Sub-seed for stream `index` of a parent seed. Stream k never depends on
/// how many other streams exist.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

}  // namespace rotorbar
