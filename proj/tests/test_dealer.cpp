#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>

#include "smpcfl/dcf.hpp"
#include "smpcfl/dealer.hpp"
#include "smpcfl/stats.hpp"

using namespace smpcfl;

namespace {
const FixedPointConfig k8{8, 2};
const FixedPointConfig k32{32, 16};

RingElement eval_sum(const ComparisonKey& a, const ComparisonKey& b, RingElement x,
                     const FixedPointConfig& cfg) {
    return ring_add(fss_eval(0, a, x, cfg), fss_eval(1, b, x, cfg), cfg);
}
} // namespace

TEST_CASE("beaver: frozen identity checks") {
    Rng rng(41);
    auto [t0, t1] = gen_beaver(1, 4, rng, k32);
    for (std::size_t j = 0; j < 4; ++j) {
        const RingElement a = ring_add(t0[0].a.values[j], t1[0].a.values[j], k32);
        const RingElement b = ring_add(t0[0].b.values[j], t1[0].b.values[j], k32);
        const RingElement c = ring_add(t0[0].c.values[j], t1[0].c.values[j], k32);
        CHECK(ring_mul(a, b, k32) == c);
    }
}

TEST_CASE("beaver: 10^4 triples all satisfy c = ab mod N") {
    Rng rng(42);
    auto [t0, t1] = gen_beaver(10000, 1, rng, k32);
    std::size_t bad = 0;
    for (std::size_t i = 0; i < t0.size(); ++i) {
        const RingElement a = ring_add(t0[i].a.values[0], t1[i].a.values[0], k32);
        const RingElement b = ring_add(t0[i].b.values[0], t1[i].b.values[0], k32);
        const RingElement c = ring_add(t0[i].c.values[0], t1[i].c.values[0], k32);
        if (!(ring_mul(a, b, k32) == c)) ++bad;
    }
    CHECK(bad == 0);
}

TEST_CASE("beaver: a, b marginals look uniform") {
    Rng rng(43);
    auto [t0, t1] = gen_beaver(20000, 1, rng, k8);
    std::vector<std::uint64_t> counts(256, 0);
    for (std::size_t i = 0; i < t0.size(); ++i)
        ++counts[ring_add(t0[i].a.values[0], t1[i].a.values[0], k8).v];
    CHECK(uniformity_not_rejected(counts));
}

TEST_CASE("dcf: exhaustive x <= alpha at k=8 for every alpha") {
    Rng rng(44);
    for (std::uint64_t alpha = 0; alpha < 256; ++alpha) {
        auto [d0, d1] = dcf_gen(alpha, RingElement{1}, k8, rng);
        for (std::uint64_t x = 0; x < 256; ++x) {
            const RingElement sum =
                ring_add(dcf_eval(0, d0, x, k8), dcf_eval(1, d1, x, k8), k8);
            CHECK(sum.v == (x <= alpha ? 1u : 0u));
        }
    }
}

TEST_CASE("comparison key: spec walkthrough with mask alpha = 5 at k=8") {
    // Keys embedding a = 5 must classify x = y + a by the sign of y.
    Rng rng(45);
    auto [c0, c1] = gen_comparison_key_for_mask(RingElement{5}, rng, k8);
    CHECK(ring_add(c0.mask_share, c1.mask_share, k8).v == 5);
    CHECK(eval_sum(c0, c1, RingElement{3}, k8).v == 1); // y = -2
    CHECK(eval_sum(c0, c1, RingElement{5}, k8).v == 1); // y = 0, boundary included
    CHECK(eval_sum(c0, c1, RingElement{7}, k8).v == 0); // y = +2
}

TEST_CASE("comparison key: exhaustive k=8 over all x for random keys") {
    Rng rng(46);
    for (int trial = 0; trial < 64; ++trial) {
        auto [c0, c1] = gen_comparison_key(rng, k8);
        const RingElement a = ring_add(c0.mask_share, c1.mask_share, k8);
        for (std::uint64_t x = 0; x < 256; ++x) {
            const std::uint64_t want =
                signed_value(ring_sub(RingElement{x}, a, k8), k8) <= 0 ? 1 : 0;
            CHECK(eval_sum(c0, c1, RingElement{x}, k8).v == want);
        }
    }
}

TEST_CASE("comparison keygen is deterministic under a fixed seed") {
    Rng a(47), b(47);
    auto [a0, a1] = gen_comparison_key(a, k32);
    auto [b0, b1] = gen_comparison_key(b, k32);
    CHECK(a0.mask_share == b0.mask_share);
    CHECK(a1.wrap_share == b1.wrap_share);
    CHECK(a0.dcf_hi.root_seed == b0.dcf_hi.root_seed);
    CHECK(a0.dcf_hi.leaf_cw == b0.dcf_hi.leaf_cw);
    REQUIRE(a1.dcf_lo.levels.size() == b1.dcf_lo.levels.size());
    for (std::size_t i = 0; i < a1.dcf_lo.levels.size(); ++i)
        CHECK(a1.dcf_lo.levels[i].seed_cw == b1.dcf_lo.levels[i].seed_cw);
}

TEST_CASE("fss_eval is a pure function") {
    Rng rng(48);
    auto [c0, c1] = gen_comparison_key(rng, k32);
    const RingElement x{123456789};
    CHECK(fss_eval(0, c0, x, k32) == fss_eval(0, c0, x, k32));
    CHECK(fss_eval(1, c1, x, k32) == fss_eval(1, c1, x, k32));
    CHECK_THROWS_AS(fss_eval(2, c0, x, k32), ProtocolError);
}

TEST_CASE("mask marginal over many keys is uniform (chi-square)") {
    Rng rng(49);
    std::vector<std::uint64_t> counts(256, 0);
    for (int i = 0; i < 10000; ++i) {
        auto [c0, c1] = gen_comparison_key(rng, k8);
        ++counts[ring_add(c0.mask_share, c1.mask_share, k8).v];
    }
    CHECK(uniformity_not_rejected(counts));
}

TEST_CASE("one-key secrecy: party-0 eval outputs over random keys look uniform") {
    Rng rng(50);
    std::vector<std::uint64_t> counts(256, 0);
    const RingElement x{17};
    for (int i = 0; i < 20000; ++i) {
        auto [c0, c1] = gen_comparison_key(rng, k8);
        ++counts[fss_eval(0, c0, x, k8).v];
    }
    CHECK(uniformity_not_rejected(counts));
}

TEST_CASE("pool ownership: a consumed triple cannot be taken twice") {
    Rng rng(51);
    auto [p0, p1] = gen_pools(2, 1, rng, k32);
    CHECK(p0.triples_left() == 2);
    const BeaverTriple t = p0.take_triple(1);
    CHECK(p0.triples_left() == 1);
    (void)p0.take_triple(1);
    CHECK_THROWS_AS(p0.take_triple(1), SetupError);
    CHECK(p0.keys_left() == 1);
    (void)p0.take_key();
    CHECK_THROWS_AS(p0.take_key(), SetupError);
    (void)t;
}

TEST_CASE("randomness file round-trip preserves material bit-exactly") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "smpcfl_test_rnd";
    fs::create_directories(dir);
    const std::string path = (dir / "m.p0.rnd").string();

    Rng rng(52);
    auto [t0, t1] = gen_beaver(3, 2, rng, k32);
    std::vector<ComparisonKey> keys;
    {
        auto [c0, c1] = gen_comparison_key(rng, k32);
        keys.push_back(std::move(c0));
        (void)c1;
    }
    write_randomness_file(path, 0, k32, t0, keys);
    const RandomnessFile back = read_randomness_file(path);
    CHECK(back.party == 0);
    CHECK(back.cfg == k32);
    REQUIRE(back.triples.size() == 3);
    REQUIRE(back.keys.size() == 1);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(back.triples[i].a.values[j] == t0[i].a.values[j]);
            CHECK(back.triples[i].b.values[j] == t0[i].b.values[j]);
            CHECK(back.triples[i].c.values[j] == t0[i].c.values[j]);
        }
    CHECK(back.keys[0].mask_share == keys[0].mask_share);
    CHECK(back.keys[0].dcf_hi.root_seed == keys[0].dcf_hi.root_seed);
    // Evaluations agree after the round-trip.
    const RingElement x{424242};
    CHECK(fss_eval(0, back.keys[0], x, k32) == fss_eval(0, keys[0], x, k32));

    SUBCASE("bad magic is rejected") {
        const std::string bad = (dir / "bad.rnd").string();
        std::ofstream os(bad, std::ios::binary);
        os << "NOTMAGIC following bytes";
        os.close();
        CHECK_THROWS_AS(read_randomness_file(bad), ConfigError);
    }
    fs::remove_all(dir);
}

TEST_CASE("spot checks at k=32: masked sign predicate on random (a, y) pairs") {
    Rng rng(53);
    std::size_t bad = 0;
    for (int i = 0; i < 2000; ++i) {
        auto [c0, c1] = gen_comparison_key(rng, k32);
        const RingElement a = ring_add(c0.mask_share, c1.mask_share, k32);
        const RingElement y = rng.ring(k32);
        const RingElement x = ring_add(y, a, k32);
        const std::uint64_t want = signed_value(y, k32) <= 0 ? 1 : 0;
        if (eval_sum(c0, c1, x, k32).v != want) ++bad;
    }
    CHECK(bad == 0);
}
