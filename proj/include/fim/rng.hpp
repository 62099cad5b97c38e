#pragma once

#include <array>
#include <cstdint>

#include <boost/math/special_functions/erf.hpp>

namespace fim {

// Counter-based random numbers (Philox4x32-10, Salmon et al. 2011).
//
// Every draw is a pure function of (key, counter), so path-level and
// node-level substreams can be carved out of one 64-bit seed without any
// sequential state. This is what makes simulation output independent of
// the number of worker threads.

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& x, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
}

} // namespace detail

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                               std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        detail::philox_round(counter, key);
        key[0] += detail::kPhiloxW0;
        key[1] += detail::kPhiloxW1;
    }
    return counter;
}

// splitmix64 finalizer; used to derive independent node seeds from (seed, a, b).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(mix64(seed) ^ a) ^ b);
}

// One Philox block keyed by a 64-bit seed; counter words identify the draw.
inline std::array<std::uint32_t, 4> philox_block(std::uint64_t seed, std::uint32_t c0,
                                                 std::uint32_t c1, std::uint32_t c2 = 0,
                                                 std::uint32_t c3 = 0) {
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                              static_cast<std::uint32_t>(seed >> 32)};
    return philox4x32({c0, c1, c2, c3}, key);
}

// Uniform on the open interval (0,1): 53 random mantissa bits, offset by half an ulp
// so 0 and 1 are never produced and the normal quantile below stays finite.
inline double uniform_open(const std::array<std::uint32_t, 4>& block) {
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(block[0]) << 32) | static_cast<std::uint64_t>(block[1]);
    return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

inline double inverse_normal_cdf(double u) {
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

// Standard normal draw identified by (seed, c0, c1, c2): inverse-CDF transform of
// one Philox block.
inline double normal_draw(std::uint64_t seed, std::uint32_t c0, std::uint32_t c1,
                          std::uint32_t c2 = 0) {
    return inverse_normal_cdf(uniform_open(philox_block(seed, c0, c1, c2)));
}

inline double uniform_draw(std::uint64_t seed, std::uint32_t c0, std::uint32_t c1,
                           std::uint32_t c2 = 0) {
    return uniform_open(philox_block(seed, c0, c1, c2));
}

} // namespace fim
