#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rsf {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; decorrelates adjacent integer seeds.
std::uint64_t mix_seed(std::uint64_t value) noexcept;

// Deterministic child seed from a base seed and a path of indices,
// e.g. derive_seed(rollout_seed, {step, agent}).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept;

Rng make_rng(std::uint64_t seed);

}  // namespace rsf
