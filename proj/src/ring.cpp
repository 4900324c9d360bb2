#include "smpcfl/ring.hpp"

#include <cmath>

namespace smpcfl {

RingElement encode_with_frac(double r, int frac_bits, const FixedPointConfig& cfg) {
    if (!std::isfinite(r)) throw EncodeRangeError("cannot encode non-finite value");
    const double scaled = r * std::ldexp(1.0, frac_bits);
    // llround rounds half away from zero, keeping encode(-r) == N - encode(r).
    const double limit = std::ldexp(1.0, cfg.ring_bits - 1);
    if (std::abs(scaled) >= limit)
        throw EncodeRangeError("value " + std::to_string(r) + " overflows " +
                               std::to_string(cfg.ring_bits) + "-bit ring at f=" +
                               std::to_string(frac_bits));
    const long long m = std::llround(scaled);
    if (static_cast<unsigned long long>(std::llabs(m)) > cfg.half()) {
        throw EncodeRangeError("value " + std::to_string(r) + " overflows " +
                               std::to_string(cfg.ring_bits) + "-bit ring at f=" +
                               std::to_string(frac_bits));
    }
    return from_signed(m, cfg);
}

} // namespace smpcfl
