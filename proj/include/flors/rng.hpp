#pragma once

#include <cstdint>
#include <random>

namespace flors {

// Unbiased draw in [0, bound) via rejection. std::uniform_int_distribution is
// implementation-defined, so seeded runs would not be reproducible across
// standard libraries; mt19937_64 output itself is specified exactly.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % bound;
}

// Uniform double in [0,1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace flors
