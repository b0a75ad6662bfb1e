#pragma once

#include <cmath>
#include <numbers>
#include <random>

namespace cbc {

/// Uniform draw in [0, 1) from the top 53 bits. Unlike the standard
/// distributions this gives the same stream on every standard library.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Standard normal draw via Box-Muller.
inline double standard_normal(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace cbc
