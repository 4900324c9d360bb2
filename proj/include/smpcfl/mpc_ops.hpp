#pragma once

#include <cstdint>
#include <vector>

#include "smpcfl/dealer.hpp"
#include "smpcfl/ring.hpp"
#include "smpcfl/sharing.hpp"
#include "smpcfl/simnet.hpp"

namespace smpcfl {

// Public value produced by an explicit open exchange; identical at both
// parties by construction.
struct OpenedValue {
    RingElement value;
    std::uint32_t round = 0;
};

// Two-party online session state: this party's view of the protocol plus the
// correlated-randomness pool the dealer filled offline.
class MpcSession {
public:
    MpcSession(PartyCtx& ctx, int peer, RandomnessPool pool)
        : ctx_(ctx), peer_(peer), pool_(std::move(pool)) {}

    int party() const { return ctx_.id() < peer_ ? 0 : 1; }
    PartyCtx& ctx() { return ctx_; }
    RandomnessPool& pool() { return pool_; }
    const FixedPointConfig& cfg() const { return cfg_; }
    void set_cfg(const FixedPointConfig& c) { cfg_ = c; }

    // Exchange a batch of share values with the peer and return the opened
    // public values. One message each direction, elem_bytes() per element.
    std::vector<RingElement> open(std::span<const RingElement> shares, const char* tag);
    OpenedValue open_one(RingElement share, const char* tag);

    std::uint32_t rounds_completed() const { return round_; }

private:
    PartyCtx& ctx_;
    int peer_;
    RandomnessPool pool_;
    FixedPointConfig cfg_;
    std::uint32_t round_ = 0;
};

// Helpers to wrap this party's values in the two-party share container.
ShareVector make_2pc_share(int party, const FixedPointConfig& cfg, std::vector<RingElement> values);

// z = x * y via a Beaver triple: open e = x - a and d = y - b, then
// z = c + e*b + d*a (+ e*d at party 0). Consumes the triple.
ShareVector beaver_mul(MpcSession& s, const ShareVector& x, const ShareVector& y,
                       BeaverTriple triple);
ShareVector beaver_mul_pooled(MpcSession& s, const ShareVector& x, const ShareVector& y);

// Local probabilistic truncation by `shift` bits (defaults to cfg.frac_bits):
// party 0 arithmetic-shifts its share, party 1 shifts the negated share and
// negates back. Off by at most 1 LSB; fails with probability ~|x|/2^(k-1).
ShareVector truncate(const ShareVector& x, int shift = -1);

// Bit shares of 1{signed(y) <= 0}: mask with the key's share of a, open
// x = y + a, evaluate the comparison FSS. Consumes the key.
ShareVector compare_leq_zero(MpcSession& s, const ShareVector& y, ComparisonKey key);
ShareVector compare_leq_zero_pooled(MpcSession& s, const ShareVector& y);

// relu(y) = y * (1 - 1{y <= 0}); exact in fixed point. One key and one
// triple per element, taken from the session pool.
ShareVector secure_relu(MpcSession& s, const ShareVector& y);

// max(u, v) = v + (u - v) * 1{u - v > 0}; ties keep v. Elementwise.
ShareVector secure_max(MpcSession& s, const ShareVector& u, const ShareVector& v);

} // namespace smpcfl
