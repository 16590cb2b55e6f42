// rng.hpp — counter-based normal streams (Philox4x32-10)
//
// Every random number is a pure function of (seed, trajectory_index,
// stream_id, draw_index), so ensembles reproduce bit-identically no matter
// how trajectories are scheduled across threads.
//
// Stream-id layout (32 bit):
//   bits 0..3   stream kind (see StreamKind)
//   bit  4      side (bra/ket) for nested unravelling averages
//   bits 8..31  mode index or inner-replica index, depending on the kind
#pragma once

#include <cstdint>
#include <cmath>

#include "decolab/core.hpp"

namespace decolab::rng {

enum class StreamKind : std::uint32_t {
    system_brownian = 0,  // b of Eq.-style system noise
    bath_initials   = 1,  // x_k draws
    markov_bd       = 2,  // complex white noise B_D
    markov_br       = 3,  // real white noise B_R
    markov_b        = 4,  // system Brownian motion in the Markov limit
    bath_brownian   = 8,  // b_k; mode index in bits 8..31
};

inline std::uint32_t stream_id(StreamKind kind, std::uint32_t index = 0, std::uint32_t side = 0) {
    return static_cast<std::uint32_t>(kind) | (side << 4) | (index << 8);
}

namespace detail {

inline void philox_round(std::uint32_t ctr[4], const std::uint32_t key[2]) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t r0 = hi1 ^ ctr[1] ^ key[0];
    const std::uint32_t r1 = lo1;
    const std::uint32_t r2 = hi0 ^ ctr[3] ^ key[1];
    const std::uint32_t r3 = lo0;
    ctr[0] = r0; ctr[1] = r1; ctr[2] = r2; ctr[3] = r3;
}

inline void philox4x32_10(std::uint32_t ctr[4], std::uint32_t k0, std::uint32_t k1) {
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    std::uint32_t key[2] = {k0, k1};
    for (int r = 0; r < 10; ++r) {
        philox_round(ctr, key);
        if (r < 9) { key[0] += kW0; key[1] += kW1; }
    }
}

inline double to_open01(std::uint64_t x) {
    // (0,1]: never returns 0, safe under log()
    return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
}

inline double to_half_open01(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

} // namespace detail

// Two standard normals per counter block (Box-Muller on Philox output).
inline void normal_pair(std::uint64_t seed, std::uint32_t trajectory_index,
                        std::uint32_t stream, std::uint64_t pair_index,
                        double& z0, double& z1) {
    std::uint32_t ctr[4] = {
        static_cast<std::uint32_t>(pair_index),
        static_cast<std::uint32_t>(pair_index >> 32),
        stream,
        trajectory_index,
    };
    detail::philox4x32_10(ctr, static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32));
    const std::uint64_t a = (static_cast<std::uint64_t>(ctr[0]) << 32) | ctr[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(ctr[2]) << 32) | ctr[3];
    const double r = std::sqrt(-2.0 * std::log(detail::to_open01(a)));
    const double th = 2.0 * kPi * detail::to_half_open01(b);
    z0 = r * std::cos(th);
    z1 = r * std::sin(th);
}

// n independent N(0,1) draws from one stream.
inline void fill_normals(std::uint64_t seed, std::uint32_t trajectory_index,
                         std::uint32_t stream, double* out, std::size_t n) {
    double z0, z1;
    for (std::size_t i = 0; i + 1 < n; i += 2) {
        normal_pair(seed, trajectory_index, stream, i / 2, z0, z1);
        out[i] = z0;
        out[i + 1] = z1;
    }
    if (n % 2 == 1) {
        normal_pair(seed, trajectory_index, stream, n / 2, z0, z1);
        out[n - 1] = z0;
    }
}

// Single N(0,1) draw addressed by index within a stream.
inline double normal_at(std::uint64_t seed, std::uint32_t trajectory_index,
                        std::uint32_t stream, std::uint64_t index) {
    double z0, z1;
    normal_pair(seed, trajectory_index, stream, index / 2, z0, z1);
    return (index % 2 == 0) ? z0 : z1;
}

} // namespace decolab::rng
