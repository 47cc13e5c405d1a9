#pragma once

#include <cstdint>

#include "fimi/rational.hpp"

namespace fimi::rng {

// Stateless counter-based generator.
//
// One 64-bit word per (seed, trial, loan) key, produced by chaining the
// splitmix64 finalizer with the golden-gamma increment:
//
//   h = mix(seed + GAMMA); h = mix(h + GAMMA + trial); h = mix(h + GAMMA + loan)
//
// The scheme is fixed: results are reproducible bit for bit across platforms,
// build modes and parallel schedules, because no call reads or writes shared
// state. Changing it would change every simulation report.

inline constexpr std::uint64_t GAMMA = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

constexpr std::uint64_t word_at(std::uint64_t seed, std::uint64_t trial,
                                std::uint64_t loan) noexcept {
    std::uint64_t h = mix(seed + GAMMA);
    h = mix(h + GAMMA + trial);
    h = mix(h + GAMMA + loan);
    return h;
}

/// Exact Bernoulli draw: true with probability p, decided by comparing the
/// 64-bit word against p's rational threshold in 128-bit integer arithmetic.
/// p = 0 is never true, p = 1 always.
constexpr bool bernoulli(std::uint64_t word, const Rational& p) noexcept {
    using u128 = unsigned __int128;
    // word < p * 2^64  <=>  word * den < num * 2^64
    return static_cast<u128>(word) * static_cast<u128>(p.den()) <
           static_cast<u128>(p.num()) << 64;
}

} // namespace fimi::rng
