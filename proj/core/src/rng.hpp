#pragma once

// Portable random helpers. The standard distributions are
// implementation-defined; these keep corpora and samplers bit-stable across
// standard libraries.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace eguot::detail {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline int64_t uniform_int(std::mt19937_64& rng, int64_t lo, int64_t hi_inclusive) {
    const auto span = static_cast<uint64_t>(hi_inclusive - lo + 1);
    return lo + static_cast<int64_t>(rng() % span);
}

inline double normal(std::mt19937_64& rng) {
    // Box-Muller, one value per call.
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace eguot::detail
