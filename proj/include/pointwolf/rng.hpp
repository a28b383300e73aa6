#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace pointwolf {

/// Every stochastic operation takes an explicit generator of this type.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1). Consumes exactly one 64-bit draw.
inline double canonical(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform in [lo, hi]. Consumes one draw even when lo == hi, so the draw
/// sequence does not depend on the configured ranges.
inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * canonical(rng);
}

/// Uniform integer in [0, n). n must be positive.
template <typename Int>
Int uniform_index(Rng& rng, Int n) {
    auto i = static_cast<Int>(canonical(rng) * static_cast<double>(n));
    return i < n ? i : n - 1;
}

inline bool bernoulli(Rng& rng, double p) {
    return canonical(rng) < p;
}

/// Standard normal deviate (Box-Muller, two draws per call).
inline double standard_normal(Rng& rng) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double u1 = 1.0 - canonical(rng);  // (0, 1]
    const double u2 = canonical(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed for a path of ordinals below `master`:
///   s0 = mix64(master), s_{i+1} = mix64(s_i ^ mix64(ordinal_i + 1)).
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> ordinals) {
    std::uint64_t s = mix64(master);
    for (auto o : ordinals) s = mix64(s ^ mix64(o + 1));
    return s;
}

}  // namespace pointwolf
