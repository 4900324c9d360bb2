#include "smpcfl/dcf.hpp"

#include "smpcfl/errors.hpp"

namespace smpcfl {

namespace {

inline Seed128 random_seed(Rng& rng) { return Seed128{rng.u64(), rng.u64()}; }

inline RingElement signed_apply(int party, RingElement acc, RingElement v,
                                const FixedPointConfig& cfg) {
    return party == 0 ? ring_add(acc, v, cfg) : ring_sub(acc, v, cfg);
}

} // namespace

std::pair<DcfKey, DcfKey> dcf_gen(std::uint64_t alpha, RingElement beta,
                                  const FixedPointConfig& cfg, Rng& rng) {
    const int n = cfg.ring_bits;
    DcfKey k0, k1;
    k0.bits = k1.bits = n;
    k0.root_seed = random_seed(rng);
    k1.root_seed = random_seed(rng);
    k0.root_t = 0;
    k1.root_t = 1;
    k0.levels.resize(n);
    k1.levels.resize(n);

    Seed128 s0 = k0.root_seed, s1 = k1.root_seed;
    std::uint8_t t0 = 0, t1 = 1;

    for (int i = 0; i < n; ++i) {
        const int bit = static_cast<int>((alpha >> (n - 1 - i)) & 1u);
        const NodeExpansion e0 = prg_expand(s0);
        const NodeExpansion e1 = prg_expand(s1);

        DcfLevel cw;
        // Seed correction comes from the off-path ("lose") side so applying it
        // equalizes the lose children while the keep children stay independent.
        const Seed128 lose0 = bit == 0 ? e0.seed_r : e0.seed_l;
        const Seed128 lose1 = bit == 0 ? e1.seed_r : e1.seed_l;
        cw.seed_cw = lose0 ^ lose1;
        cw.t_cw_l = static_cast<std::uint8_t>(e0.t_l ^ e1.t_l ^ bit ^ 1);
        cw.t_cw_r = static_cast<std::uint8_t>(e0.t_r ^ e1.t_r ^ bit);

        // Exactly one party carries t = 1 on the alpha path; its sign fixes the
        // value corrections. Walking left past a 1-bit of alpha means x < alpha,
        // so that branch must contribute beta; every other branch contributes 0.
        const int hot = t0 == 1 ? 0 : 1;
        const RingElement target_l = bit == 1 ? beta : RingElement{0};
        const RingElement target_r = RingElement{0};
        RingElement dl = ring_sub(target_l, ring_sub(ring_reduce(e0.v_l, cfg),
                                                     ring_reduce(e1.v_l, cfg), cfg), cfg);
        RingElement dr = ring_sub(target_r, ring_sub(ring_reduce(e0.v_r, cfg),
                                                     ring_reduce(e1.v_r, cfg), cfg), cfg);
        if (hot == 1) {
            dl = ring_neg(dl, cfg);
            dr = ring_neg(dr, cfg);
        }
        cw.v_cw_l = dl.v;
        cw.v_cw_r = dr.v;
        k0.levels[i] = cw;
        k1.levels[i] = cw;

        // Advance both parties along the alpha path.
        const Seed128 keep0 = bit == 0 ? e0.seed_l : e0.seed_r;
        const Seed128 keep1 = bit == 0 ? e1.seed_l : e1.seed_r;
        const std::uint8_t kt0 = bit == 0 ? e0.t_l : e0.t_r;
        const std::uint8_t kt1 = bit == 0 ? e1.t_l : e1.t_r;
        const std::uint8_t kt_cw = bit == 0 ? cw.t_cw_l : cw.t_cw_r;
        s0 = t0 ? (keep0 ^ cw.seed_cw) : keep0;
        s1 = t1 ? (keep1 ^ cw.seed_cw) : keep1;
        t0 = static_cast<std::uint8_t>(kt0 ^ (t0 & kt_cw));
        t1 = static_cast<std::uint8_t>(kt1 ^ (t1 & kt_cw));
    }

    // x == alpha leaves both parties on-path (t0 ^ t1 == 1); the leaf
    // correction makes that path contribute beta for the inclusive predicate.
    const int hot = t0 == 1 ? 0 : 1;
    RingElement leaf = beta;
    if (hot == 1) leaf = ring_neg(leaf, cfg);
    k0.leaf_cw = k1.leaf_cw = leaf.v;
    return {std::move(k0), std::move(k1)};
}

RingElement dcf_eval(int party, const DcfKey& key, std::uint64_t x, const FixedPointConfig& cfg) {
    if (party != 0 && party != 1) throw ProtocolError("dcf_eval: party index must be 0 or 1");
    if (key.bits != cfg.ring_bits) throw ProtocolError("dcf_eval: key domain does not match cfg");
    Seed128 s = key.root_seed;
    std::uint8_t t = key.root_t;
    RingElement acc{0};
    for (int i = 0; i < key.bits; ++i) {
        const DcfLevel& cw = key.levels[i];
        const NodeExpansion e = prg_expand(s);
        const int bit = static_cast<int>((x >> (key.bits - 1 - i)) & 1u);
        RingElement v = ring_reduce(bit == 0 ? e.v_l : e.v_r, cfg);
        if (t) {
            const RingElement v_cw = ring_reduce(bit == 0 ? cw.v_cw_l : cw.v_cw_r, cfg);
            v = ring_add(v, v_cw, cfg);
        }
        acc = signed_apply(party, acc, v, cfg);

        const Seed128 next = bit == 0 ? e.seed_l : e.seed_r;
        const std::uint8_t nt = bit == 0 ? e.t_l : e.t_r;
        const std::uint8_t t_cw = bit == 0 ? cw.t_cw_l : cw.t_cw_r;
        s = t ? (next ^ cw.seed_cw) : next;
        t = static_cast<std::uint8_t>(nt ^ (t & t_cw));
    }
    if (t) acc = signed_apply(party, acc, ring_reduce(key.leaf_cw, cfg), cfg);
    return acc;
}

} // namespace smpcfl
