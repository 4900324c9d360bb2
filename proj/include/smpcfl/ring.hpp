#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "smpcfl/errors.hpp"

namespace smpcfl {

// Element of Z_N with N = 2^k, stored as the canonical representative in
// [0, N). All reductions happen in the ring_* helpers below.
struct RingElement {
    std::uint64_t v = 0;

    friend bool operator==(RingElement a, RingElement b) { return a.v == b.v; }
    friend bool operator!=(RingElement a, RingElement b) { return a.v != b.v; }
};

// Ring width and fixed-point scale shared by every protocol participant.
// N = 2^k; reals are embedded as round(r * 2^f) mod N.
struct FixedPointConfig {
    int ring_bits = 32; // k
    int frac_bits = 16; // f

    void validate() const {
        if (ring_bits < 6 || ring_bits > 64)
            throw ConfigError("ring_bits must be in [6, 64], got " + std::to_string(ring_bits));
        if (frac_bits < 2 || frac_bits > ring_bits - 4)
            throw ConfigError("frac_bits must satisfy 2 <= f <= k-4, got f=" +
                              std::to_string(frac_bits) + " k=" + std::to_string(ring_bits));
    }

    // N - 1. For k = 64 the mask is all ones and native wrap-around applies.
    std::uint64_t mask() const {
        return ring_bits == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << ring_bits) - 1);
    }
    // N / 2, the signed-interpretation threshold.
    std::uint64_t half() const { return std::uint64_t{1} << (ring_bits - 1); }
    // Bytes needed to serialize one element.
    int elem_bytes() const { return (ring_bits + 7) / 8; }

    friend bool operator==(const FixedPointConfig& a, const FixedPointConfig& b) {
        return a.ring_bits == b.ring_bits && a.frac_bits == b.frac_bits;
    }
};

inline RingElement ring_reduce(std::uint64_t raw, const FixedPointConfig& cfg) {
    return RingElement{raw & cfg.mask()};
}

inline RingElement ring_add(RingElement x, RingElement y, const FixedPointConfig& cfg) {
    return ring_reduce(x.v + y.v, cfg);
}

inline RingElement ring_sub(RingElement x, RingElement y, const FixedPointConfig& cfg) {
    return ring_reduce(x.v - y.v, cfg);
}

// Exact mod-2^k product: uint64 wrap-around is mod 2^64 and 2^k divides 2^64,
// so masking the wrapped product is correct for every k <= 64.
inline RingElement ring_mul(RingElement x, RingElement y, const FixedPointConfig& cfg) {
    return ring_reduce(x.v * y.v, cfg);
}

inline RingElement ring_neg(RingElement x, const FixedPointConfig& cfg) {
    return ring_reduce(0 - x.v, cfg);
}

// Signed interpretation: v if v < N/2 else v - N. Sign-extending the high
// bits gives the two's-complement value for every k up to 64.
inline std::int64_t signed_value(RingElement x, const FixedPointConfig& cfg) {
    if (x.v < cfg.half()) return static_cast<std::int64_t>(x.v);
    return static_cast<std::int64_t>(x.v | ~cfg.mask());
}

// Embed an integer (two's-complement style) into the ring.
inline RingElement from_signed(std::int64_t s, const FixedPointConfig& cfg) {
    return ring_reduce(static_cast<std::uint64_t>(s), cfg);
}

// Fixed-point encode at an explicit fractional scale. Rounds half away from
// zero; rejects magnitudes that do not fit the signed range.
RingElement encode_with_frac(double r, int frac_bits, const FixedPointConfig& cfg);

inline RingElement encode_fixed(double r, const FixedPointConfig& cfg) {
    return encode_with_frac(r, cfg.frac_bits, cfg);
}

inline double decode_with_frac(RingElement x, int frac_bits, const FixedPointConfig& cfg) {
    return static_cast<double>(signed_value(x, cfg)) / std::ldexp(1.0, frac_bits);
}

inline double decode_fixed(RingElement x, const FixedPointConfig& cfg) {
    return decode_with_frac(x, cfg.frac_bits, cfg);
}

} // namespace smpcfl
