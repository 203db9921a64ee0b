#pragma once

// Counter-based random number streams (Philox4x32-10).
//
// A stream is addressed by (seed, stream id); its output is a pure
// function of that address and the number of values drawn so far, so
// Monte Carlo runs are reproducible independently of scheduling as long
// as each logical task owns its own stream.

#include <cmath>
#include <cstdint>

#include "mmclab/linalg.hpp"

namespace mmclab {

namespace detail {

struct PhiloxBlock {
    uint32_t v[4];
};

inline PhiloxBlock philox4x32_10(uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3,
                                 uint32_t k0, uint32_t k1) {
    constexpr uint32_t M0 = 0xD2511F53u;
    constexpr uint32_t M1 = 0xCD9E8D57u;
    constexpr uint32_t W0 = 0x9E3779B9u;
    constexpr uint32_t W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        uint64_t p0 = static_cast<uint64_t>(M0) * c0;
        uint64_t p1 = static_cast<uint64_t>(M1) * c2;
        uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
        uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
        uint32_t n0 = hi1 ^ c1 ^ k0;
        uint32_t n1 = lo1;
        uint32_t n2 = hi0 ^ c3 ^ k1;
        uint32_t n3 = lo0;
        c0 = n0;
        c1 = n1;
        c2 = n2;
        c3 = n3;
        k0 += W0;
        k1 += W1;
    }
    return PhiloxBlock{{c0, c1, c2, c3}};
}

}  // namespace detail

class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(uint64_t seed, uint64_t stream_id) : seed_(seed), stream_(stream_id) {}

    uint64_t seed() const { return seed_; }
    uint64_t stream_id() const { return stream_; }

    uint64_t next_u64() {
        if (pending_valid_) {
            pending_valid_ = false;
            return pending_;
        }
        auto blk = detail::philox4x32_10(
            static_cast<uint32_t>(counter_), static_cast<uint32_t>(counter_ >> 32),
            static_cast<uint32_t>(stream_), static_cast<uint32_t>(stream_ >> 32),
            static_cast<uint32_t>(seed_), static_cast<uint32_t>(seed_ >> 32));
        ++counter_;
        pending_ = (static_cast<uint64_t>(blk.v[3]) << 32) | blk.v[2];
        pending_valid_ = true;
        return (static_cast<uint64_t>(blk.v[1]) << 32) | blk.v[0];
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; the partner value is cached.
    double normal() {
        if (cached_valid_) {
            cached_valid_ = false;
            return cached_;
        }
        double u1 = 1.0 - uniform01();  // in (0, 1]
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double angle = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(angle);
        cached_valid_ = true;
        return r * std::cos(angle);
    }

private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t counter_ = 0;
    uint64_t pending_ = 0;
    double cached_ = 0.0;
    bool pending_valid_ = false;
    bool cached_valid_ = false;
};

// d independent N(0, dt) increments.
inline Vec gaussian_noise(RngStream& rng, int d, double dt) {
    if (!(dt > 0)) throw invalid_argument_error("gaussian_noise: dt must be positive");
    Vec g(d);
    double s = std::sqrt(dt);
    for (int i = 0; i < d; ++i) g[i] = s * rng.normal();
    return g;
}

}  // namespace mmclab
