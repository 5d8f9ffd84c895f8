#pragma once
// Counter-based random number generation (Philox 4x32-10). Every draw is a pure
// function of (seed, stream, step, coordinate), so generation order and thread
// count cannot change the output.
//
// Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC 2011.

#include <array>
#include <cmath>
#include <cstdint>

namespace mkv {

namespace detail {

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr, std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM4x32A) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM4x32B) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW32A;
    key[1] += kPhiloxW32B;
}

}  // namespace detail

// One 128-bit Philox block keyed by the 64-bit seed; the counter encodes
// (stream, step, coordinate).
inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t seed, std::uint64_t stream,
                                               std::uint32_t step, std::uint32_t coord) {
    std::array<std::uint32_t, 4> ctr = {step, coord,
                                        static_cast<std::uint32_t>(stream),
                                        static_cast<std::uint32_t>(stream >> 32)};
    std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                        static_cast<std::uint32_t>(seed >> 32)};
    for (int r = 0; r < 10; ++r) detail::philox_round(ctr, key);
    return ctr;
}

// Uniform draw in the open interval (0,1) with 53 significant bits.
inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint32_t step,
                        std::uint32_t coord) {
    const auto block = philox4x32(seed, stream, step, coord);
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(block[1]) << 32) | static_cast<std::uint64_t>(block[0]);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Inverse CDF of the standard normal distribution, Acklam's rational
// approximation (absolute error < 1.15e-9). Branching on fixed thresholds only,
// so the mapping u -> z is reproducible bit-for-bit.
inline double inverse_normal_cdf(double p) {
    constexpr double a1 = -3.969683028665376e+01, a2 = 2.209460984245205e+02;
    constexpr double a3 = -2.759285104469687e+02, a4 = 1.383577518672690e+02;
    constexpr double a5 = -3.066479806614716e+01, a6 = 2.506628277459239e+00;
    constexpr double b1 = -5.447609879822406e+01, b2 = 1.615858368580409e+02;
    constexpr double b3 = -1.556989798598866e+02, b4 = 6.680131188771972e+01;
    constexpr double b5 = -1.328068155288572e+01;
    constexpr double c1 = -7.784894002430293e-03, c2 = -3.223964580411365e-01;
    constexpr double c3 = -2.400758277161838e+00, c4 = -2.549732539343734e+00;
    constexpr double c5 = 4.374664141464968e+00, c6 = 2.938163982698783e+00;
    constexpr double d1 = 7.784695709041462e-03, d2 = 3.224671290700398e-01;
    constexpr double d3 = 2.445134137142996e+00, d4 = 3.754408661907416e+00;
    constexpr double p_low = 0.02425;
    constexpr double p_high = 1.0 - p_low;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c1 * q + c2) * q + c3) * q + c4) * q + c5) * q + c6) /
               ((((d1 * q + d2) * q + d3) * q + d4) * q + 1.0);
    }
    if (p <= p_high) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a1 * r + a2) * r + a3) * r + a4) * r + a5) * r + a6) * q /
               (((((b1 * r + b2) * r + b3) * r + b4) * r + b5) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c1 * q + c2) * q + c3) * q + c4) * q + c5) * q + c6) /
           ((((d1 * q + d2) * q + d3) * q + d4) * q + 1.0);
}

// Standard normal draw addressed by (seed, stream, step, coordinate).
inline double normal_draw(std::uint64_t seed, std::uint64_t stream, std::uint32_t step,
                          std::uint32_t coord) {
    return inverse_normal_cdf(uniform01(seed, stream, step, coord));
}

// Reserved stream / step identifiers. Particle streams use indices below the
// sentinel range; the common Brownian path and auxiliary draws use these.
constexpr std::uint64_t kCommonStream = ~std::uint64_t{0};
constexpr std::uint64_t kDirectionStream = ~std::uint64_t{0} - 1;
constexpr std::uint32_t kInitStep = ~std::uint32_t{0};

}  // namespace mkv
