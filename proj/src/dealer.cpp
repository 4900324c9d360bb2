#include "smpcfl/dealer.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "smpcfl/errors.hpp"

namespace smpcfl {

namespace {

ShareVector make_share(int party, const FixedPointConfig& cfg, std::vector<RingElement> vals) {
    ShareVector s;
    s.party = party;
    s.n_parties = 2;
    s.cfg = cfg;
    s.values = std::move(vals);
    return s;
}

} // namespace

std::pair<std::vector<BeaverTriple>, std::vector<BeaverTriple>>
gen_beaver(std::size_t count, std::size_t len, Rng& rng, const FixedPointConfig& cfg) {
    std::vector<BeaverTriple> p0, p1;
    p0.reserve(count);
    p1.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<RingElement> a0(len), a1(len), b0(len), b1(len), c0(len), c1(len);
        for (std::size_t j = 0; j < len; ++j) {
            const RingElement a = rng.ring(cfg);
            const RingElement b = rng.ring(cfg);
            const RingElement c = ring_mul(a, b, cfg);
            a0[j] = rng.ring(cfg);
            a1[j] = ring_sub(a, a0[j], cfg);
            b0[j] = rng.ring(cfg);
            b1[j] = ring_sub(b, b0[j], cfg);
            c0[j] = rng.ring(cfg);
            c1[j] = ring_sub(c, c0[j], cfg);
        }
        p0.emplace_back(make_share(0, cfg, std::move(a0)), make_share(0, cfg, std::move(b0)),
                        make_share(0, cfg, std::move(c0)));
        p1.emplace_back(make_share(1, cfg, std::move(a1)), make_share(1, cfg, std::move(b1)),
                        make_share(1, cfg, std::move(c1)));
    }
    return {std::move(p0), std::move(p1)};
}

std::pair<ComparisonKey, ComparisonKey> gen_comparison_key(Rng& rng, const FixedPointConfig& cfg) {
    return gen_comparison_key_for_mask(rng.ring(cfg), rng, cfg);
}

std::pair<ComparisonKey, ComparisonKey> gen_comparison_key_for_mask(RingElement mask, Rng& rng,
                                                                    const FixedPointConfig& cfg) {
    // Sign test 1{signed(x - a) <= 0} as membership of x in the wrapped
    // interval [a + N/2, a] of length N/2 + 1.
    const RingElement lo = ring_add(mask, RingElement{cfg.half()}, cfg);
    RingElement wrap{0};
    std::uint64_t lo_threshold = 0;
    RingElement lo_payload{1};
    if (lo.v == 0) {
        // Interval starts at zero: the low cut contributes nothing.
        lo_payload = RingElement{0};
        lo_threshold = cfg.mask();
    } else {
        lo_threshold = lo.v - 1;
        if (lo.v > mask.v) wrap = RingElement{1};
    }

    auto [hi0, hi1] = dcf_gen(mask.v, RingElement{1}, cfg, rng);
    auto [lo0, lo1] = dcf_gen(lo_threshold, lo_payload, cfg, rng);

    ComparisonKey k0, k1;
    k0.mask_share = rng.ring(cfg);
    k1.mask_share = ring_sub(mask, k0.mask_share, cfg);
    k0.wrap_share = rng.ring(cfg);
    k1.wrap_share = ring_sub(wrap, k0.wrap_share, cfg);
    k0.dcf_hi = std::move(hi0);
    k1.dcf_hi = std::move(hi1);
    k0.dcf_lo = std::move(lo0);
    k1.dcf_lo = std::move(lo1);
    return {std::move(k0), std::move(k1)};
}

RingElement fss_eval(int party, const ComparisonKey& key, RingElement x,
                     const FixedPointConfig& cfg) {
    if (party != 0 && party != 1) throw ProtocolError("fss_eval: party index must be 0 or 1");
    const RingElement hi = dcf_eval(party, key.dcf_hi, x.v, cfg);
    const RingElement lo = dcf_eval(party, key.dcf_lo, x.v, cfg);
    return ring_add(ring_sub(hi, lo, cfg), key.wrap_share, cfg);
}

BeaverTriple RandomnessPool::take_triple(std::size_t len) {
    if (triple_next_ >= triples_.size())
        throw SetupError("triple pool exhausted: need 1 more triple of length " +
                         std::to_string(len) + ", have 0");
    BeaverTriple t = std::move(triples_[triple_next_++]);
    if (t.size() != len)
        throw SetupError("triple shape mismatch: need length " + std::to_string(len) +
                         ", pooled triple has " + std::to_string(t.size()));
    return t;
}

ComparisonKey RandomnessPool::take_key() {
    if (key_next_ >= keys_.size()) throw SetupError("comparison-key pool exhausted");
    return std::move(keys_[key_next_++]);
}

void RandomnessPool::add(std::vector<BeaverTriple> triples, std::vector<ComparisonKey> keys) {
    for (auto& t : triples) triples_.push_back(std::move(t));
    for (auto& k : keys) keys_.push_back(std::move(k));
}

std::pair<RandomnessPool, RandomnessPool> gen_pools(std::size_t n_triple_elems,
                                                    std::size_t n_keys, Rng& rng,
                                                    const FixedPointConfig& cfg) {
    auto [t0, t1] = gen_beaver(n_triple_elems, 1, rng, cfg);
    std::vector<ComparisonKey> k0, k1;
    k0.reserve(n_keys);
    k1.reserve(n_keys);
    for (std::size_t i = 0; i < n_keys; ++i) {
        auto [a, b] = gen_comparison_key(rng, cfg);
        k0.push_back(std::move(a));
        k1.push_back(std::move(b));
    }
    return {RandomnessPool(std::move(t0), std::move(k0)),
            RandomnessPool(std::move(t1), std::move(k1))};
}

namespace {

constexpr char kMagic[8] = {'S', 'M', 'P', 'C', 'F', 'R', 'N', 'D'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
    std::array<char, sizeof(T)> buf;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
    os.write(buf.data(), buf.size());
}

template <typename T>
T get(std::istream& is) {
    std::array<char, sizeof(T)> buf;
    is.read(buf.data(), buf.size());
    if (!is) throw ConfigError("randomness file truncated");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[i])) << (8 * i);
    return static_cast<T>(v);
}

void put_seed(std::ostream& os, const Seed128& s) {
    put<std::uint64_t>(os, s.lo);
    put<std::uint64_t>(os, s.hi);
}

Seed128 get_seed(std::istream& is) {
    Seed128 s;
    s.lo = get<std::uint64_t>(is);
    s.hi = get<std::uint64_t>(is);
    return s;
}

void put_dcf(std::ostream& os, const DcfKey& k) {
    put<std::uint16_t>(os, static_cast<std::uint16_t>(k.bits));
    put_seed(os, k.root_seed);
    put<std::uint8_t>(os, k.root_t);
    for (const auto& lvl : k.levels) {
        put_seed(os, lvl.seed_cw);
        put<std::uint8_t>(os, lvl.t_cw_l);
        put<std::uint8_t>(os, lvl.t_cw_r);
        put<std::uint64_t>(os, lvl.v_cw_l);
        put<std::uint64_t>(os, lvl.v_cw_r);
    }
    put<std::uint64_t>(os, k.leaf_cw);
}

DcfKey get_dcf(std::istream& is) {
    DcfKey k;
    k.bits = get<std::uint16_t>(is);
    if (k.bits <= 0 || k.bits > 64) throw ConfigError("randomness file: bad DCF depth");
    k.root_seed = get_seed(is);
    k.root_t = get<std::uint8_t>(is);
    k.levels.resize(k.bits);
    for (auto& lvl : k.levels) {
        lvl.seed_cw = get_seed(is);
        lvl.t_cw_l = get<std::uint8_t>(is);
        lvl.t_cw_r = get<std::uint8_t>(is);
        lvl.v_cw_l = get<std::uint64_t>(is);
        lvl.v_cw_r = get<std::uint64_t>(is);
    }
    k.leaf_cw = get<std::uint64_t>(is);
    return k;
}

} // namespace

void write_randomness_file(const std::string& path, int party, const FixedPointConfig& cfg,
                           const std::vector<BeaverTriple>& triples,
                           const std::vector<ComparisonKey>& keys) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open randomness file for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    put<std::uint16_t>(os, kVersion);
    put<std::uint16_t>(os, static_cast<std::uint16_t>(cfg.ring_bits));
    put<std::uint16_t>(os, static_cast<std::uint16_t>(cfg.frac_bits));
    put<std::uint8_t>(os, static_cast<std::uint8_t>(party));
    put<std::uint64_t>(os, triples.size());
    put<std::uint64_t>(os, keys.size());
    for (const auto& t : triples) {
        put<std::uint32_t>(os, static_cast<std::uint32_t>(t.size()));
        for (std::size_t j = 0; j < t.size(); ++j) {
            put<std::uint64_t>(os, t.a.values[j].v);
            put<std::uint64_t>(os, t.b.values[j].v);
            put<std::uint64_t>(os, t.c.values[j].v);
        }
    }
    for (const auto& k : keys) {
        put<std::uint64_t>(os, k.mask_share.v);
        put<std::uint64_t>(os, k.wrap_share.v);
        put_dcf(os, k.dcf_hi);
        put_dcf(os, k.dcf_lo);
    }
    if (!os) throw ConfigError("write failed: " + path);
}

RandomnessFile read_randomness_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open randomness file: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ConfigError("not a randomness file (bad magic): " + path);
    const auto version = get<std::uint16_t>(is);
    if (version != kVersion) throw ConfigError("unsupported randomness file version");
    RandomnessFile f;
    f.cfg.ring_bits = get<std::uint16_t>(is);
    f.cfg.frac_bits = get<std::uint16_t>(is);
    f.cfg.validate();
    f.party = get<std::uint8_t>(is);
    const auto n_triples = get<std::uint64_t>(is);
    const auto n_keys = get<std::uint64_t>(is);
    for (std::uint64_t i = 0; i < n_triples; ++i) {
        const auto len = get<std::uint32_t>(is);
        std::vector<RingElement> a(len), b(len), c(len);
        for (std::uint32_t j = 0; j < len; ++j) {
            a[j] = ring_reduce(get<std::uint64_t>(is), f.cfg);
            b[j] = ring_reduce(get<std::uint64_t>(is), f.cfg);
            c[j] = ring_reduce(get<std::uint64_t>(is), f.cfg);
        }
        f.triples.emplace_back(make_share(f.party, f.cfg, std::move(a)),
                               make_share(f.party, f.cfg, std::move(b)),
                               make_share(f.party, f.cfg, std::move(c)));
    }
    for (std::uint64_t i = 0; i < n_keys; ++i) {
        ComparisonKey k;
        k.mask_share = ring_reduce(get<std::uint64_t>(is), f.cfg);
        k.wrap_share = ring_reduce(get<std::uint64_t>(is), f.cfg);
        k.dcf_hi = get_dcf(is);
        k.dcf_lo = get_dcf(is);
        f.keys.push_back(std::move(k));
    }
    return f;
}

} // namespace smpcfl
