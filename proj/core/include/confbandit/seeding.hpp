#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace confbandit {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives an independent seed for a named subsystem stream. One root seed
/// plus (stream, index) fully determines every random draw in a run.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index = 0) noexcept;

/// Uniform double in [0, 1) built from the top 53 bits of one draw, so the
/// sequence is identical across standard library implementations.
double unit_uniform(Rng& rng) noexcept;

/// Inverse-CDF draw from a discrete distribution. `probabilities` must be
/// non-negative; they are renormalized by their sum.
std::size_t sample_categorical(std::span<const double> probabilities, Rng& rng);

/// Standard normal draw (Box-Muller on unit_uniform).
double standard_normal(Rng& rng) noexcept;

}  // namespace confbandit
