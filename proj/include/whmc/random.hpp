#pragma once
/**
 * @file random.hpp
 * @brief Random streams and the seed-splitting rule for parallel workers.
 *
 * Every worker owns one `Rng`. The stream for child `index` of a parent
 * seed is `substream_seed(parent, index)`, the SplitMix64 finalizer applied
 * to parent + (index + 1) * 0x9E3779B97F4A7C15. Streams nest: the
 * multilevel estimator derives level seeds from the master seed and worker
 * seeds from the level seeds.
 */

#include <cmath>
#include <cstdint>
#include <random>

namespace whmc {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t substream_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return splitmix64(parent + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

inline Rng make_stream(std::uint64_t parent, std::uint64_t index) { return Rng{substream_seed(parent, index)}; }

/// Uniform on [0, 1) with 53 random bits.
template <class URBG>
inline double uniform01(URBG& rng) {
    static_assert(URBG::max() - URBG::min() >= 0xFFFFFFFFFFFFFULL, "need at least 53 random bits per call");
    return static_cast<double>((rng() - URBG::min()) >> 11) * 0x1.0p-53;
}

/// Exp(rate) by inversion.
template <class URBG>
inline double exponential(URBG& rng, double rate) {
    return -std::log1p(-uniform01(rng)) / rate;
}

}  // namespace whmc
