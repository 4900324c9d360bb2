#include "smpcfl/mpc_ops.hpp"

#include <string>

#include "smpcfl/errors.hpp"

namespace smpcfl {

namespace {

// Abstract compute charge per scalar for the simulated clocks.
constexpr std::uint64_t kOpsPerOpen = 2;
constexpr std::uint64_t kOpsPerMul = 6;
constexpr std::uint64_t kOpsPerTrunc = 2;

std::int64_t arith_shift(std::uint64_t v, int shift, const FixedPointConfig& cfg) {
    return signed_value(RingElement{v & cfg.mask()}, cfg) >> shift;
}

} // namespace

ShareVector make_2pc_share(int party, const FixedPointConfig& cfg,
                           std::vector<RingElement> values) {
    ShareVector s;
    s.party = party;
    s.n_parties = 2;
    s.cfg = cfg;
    s.values = std::move(values);
    return s;
}

std::vector<RingElement> MpcSession::open(std::span<const RingElement> shares, const char* tag) {
    const auto mine = serialize_elements(shares, cfg_);
    // Lower party id sends first; the scheduler delivers FIFO either way.
    if (party() == 0) {
        ctx_.send(peer_, mine, tag);
        const auto theirs = deserialize_elements(ctx_.recv(peer_), cfg_);
        if (theirs.size() != shares.size()) throw ProtocolError("open: length mismatch");
        std::vector<RingElement> out(shares.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = ring_add(shares[i], theirs[i], cfg_);
        ctx_.tick(kOpsPerOpen * shares.size());
        ++round_;
        return out;
    }
    const auto theirs = deserialize_elements(ctx_.recv(peer_), cfg_);
    ctx_.send(peer_, mine, tag);
    if (theirs.size() != shares.size()) throw ProtocolError("open: length mismatch");
    std::vector<RingElement> out(shares.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = ring_add(shares[i], theirs[i], cfg_);
    ctx_.tick(kOpsPerOpen * shares.size());
    ++round_;
    return out;
}

OpenedValue MpcSession::open_one(RingElement share, const char* tag) {
    const RingElement arr[1] = {share};
    auto v = open(std::span<const RingElement>(arr, 1), tag);
    return OpenedValue{v[0], round_};
}

ShareVector beaver_mul(MpcSession& s, const ShareVector& x, const ShareVector& y,
                       BeaverTriple triple) {
    if (triple.consumed) throw ProtocolError("beaver_mul: triple already consumed");
    if (x.size() != y.size() || triple.size() != x.size())
        throw ProtocolError("beaver_mul: shape mismatch (inputs " + std::to_string(x.size()) +
                            ", triple " + std::to_string(triple.size()) + ")");
    if (x.party != y.party || x.party != triple.a.party)
        throw ProtocolError("beaver_mul: mixed-party shares");
    triple.consumed = true;
    const FixedPointConfig& cfg = x.cfg;
    const std::size_t n = x.size();

    std::vector<RingElement> e_share(n), d_share(n);
    for (std::size_t i = 0; i < n; ++i) {
        e_share[i] = ring_sub(x.values[i], triple.a.values[i], cfg);
        d_share[i] = ring_sub(y.values[i], triple.b.values[i], cfg);
    }
    const auto e = s.open(e_share, tag::kOpenE);
    const auto d = s.open(d_share, tag::kOpenD);

    std::vector<RingElement> z(n);
    const bool lead = s.party() == 0;
    for (std::size_t i = 0; i < n; ++i) {
        RingElement acc = triple.c.values[i];
        acc = ring_add(acc, ring_mul(e[i], triple.b.values[i], cfg), cfg);
        acc = ring_add(acc, ring_mul(d[i], triple.a.values[i], cfg), cfg);
        if (lead) acc = ring_add(acc, ring_mul(e[i], d[i], cfg), cfg);
        z[i] = acc;
    }
    s.ctx().tick(kOpsPerMul * n);
    return make_2pc_share(x.party, cfg, std::move(z));
}

ShareVector beaver_mul_pooled(MpcSession& s, const ShareVector& x, const ShareVector& y) {
    std::vector<RingElement> a(x.size()), b(x.size()), c(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        BeaverTriple t = s.pool().take_triple(1);
        a[i] = t.a.values[0];
        b[i] = t.b.values[0];
        c[i] = t.c.values[0];
    }
    BeaverTriple merged(make_2pc_share(x.party, x.cfg, std::move(a)),
                        make_2pc_share(x.party, x.cfg, std::move(b)),
                        make_2pc_share(x.party, x.cfg, std::move(c)));
    return beaver_mul(s, x, y, std::move(merged));
}

ShareVector truncate(const ShareVector& x, int shift) {
    const FixedPointConfig& cfg = x.cfg;
    const int f = shift < 0 ? cfg.frac_bits : shift;
    ShareVector out = x;
    if (x.party == 0) {
        for (auto& v : out.values)
            v = from_signed(arith_shift(v.v, f, cfg), cfg);
    } else {
        // Shift the negated share so the two local shifts compose to one
        // arithmetic shift of the sum (up to 1 LSB).
        for (auto& v : out.values) {
            const RingElement neg = ring_neg(v, cfg);
            v = ring_neg(from_signed(arith_shift(neg.v, f, cfg), cfg), cfg);
        }
    }
    return out;
}

ShareVector compare_leq_zero(MpcSession& s, const ShareVector& y, ComparisonKey key) {
    if (key.consumed) throw ProtocolError("compare_leq_zero: key already consumed");
    if (y.size() != 1)
        throw ProtocolError("compare_leq_zero: one key per scalar; got vector of " +
                            std::to_string(y.size()));
    key.consumed = true;
    const FixedPointConfig& cfg = y.cfg;
    const RingElement masked = ring_add(y.values[0], key.mask_share, cfg);
    const OpenedValue x = s.open_one(masked, tag::kOpenX);
    const RingElement bit = fss_eval(s.party(), key, x.value, cfg);
    s.ctx().tick(4ull * cfg.ring_bits);
    return make_2pc_share(y.party, cfg, {bit});
}

ShareVector compare_leq_zero_pooled(MpcSession& s, const ShareVector& y) {
    return compare_leq_zero(s, y, s.pool().take_key());
}

namespace {

// Batched comparison: one open for the whole vector, one key per element.
ShareVector compare_leq_zero_vec(MpcSession& s, const ShareVector& y) {
    const FixedPointConfig& cfg = y.cfg;
    std::vector<ComparisonKey> keys;
    keys.reserve(y.size());
    std::vector<RingElement> masked(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        keys.push_back(s.pool().take_key());
        if (keys.back().consumed) throw ProtocolError("compare: key already consumed");
        masked[i] = ring_add(y.values[i], keys.back().mask_share, cfg);
    }
    const auto x = s.open(masked, tag::kOpenX);
    std::vector<RingElement> bits(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        keys[i].consumed = true;
        bits[i] = fss_eval(s.party(), keys[i], x[i], cfg);
    }
    s.ctx().tick(4ull * cfg.ring_bits * y.size());
    return make_2pc_share(y.party, cfg, std::move(bits));
}

// Shares of (1 - b): party 0 holds 1 - b0, party 1 holds -b1.
ShareVector one_minus(const ShareVector& b) {
    ShareVector out = b;
    for (auto& v : out.values) v = ring_neg(v, b.cfg);
    std::vector<RingElement> ones(b.size(), RingElement{1});
    return add_public(out, ones);
}

} // namespace

ShareVector secure_relu(MpcSession& s, const ShareVector& y) {
    const ShareVector leq = compare_leq_zero_vec(s, y);
    const ShareVector keep = one_minus(leq);
    return beaver_mul_pooled(s, y, keep);
}

ShareVector secure_max(MpcSession& s, const ShareVector& u, const ShareVector& v) {
    const ShareVector diff = sub_shares(u, v);
    const ShareVector leq = compare_leq_zero_vec(s, diff);
    const ShareVector gt = one_minus(leq);
    const ShareVector picked = beaver_mul_pooled(s, diff, gt);
    return add_shares(v, picked);
}

} // namespace smpcfl
