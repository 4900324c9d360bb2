#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "smpcfl/prg.hpp"
#include "smpcfl/ring.hpp"
#include "smpcfl/rng.hpp"

namespace smpcfl {

// Distributed comparison function over Z_2^k: the two keys' evaluations at a
// public point x sum to beta * 1{x <= alpha} mod N. Evaluation is a GGM-tree
// descent over the bits of x, MSB first; each level carries one seed
// correction and per-side value corrections.
struct DcfLevel {
    Seed128 seed_cw;
    std::uint8_t t_cw_l = 0, t_cw_r = 0;
    std::uint64_t v_cw_l = 0, v_cw_r = 0;
};

struct DcfKey {
    int bits = 0;       // tree depth = domain bits
    Seed128 root_seed;
    std::uint8_t root_t = 0; // party index
    std::vector<DcfLevel> levels;
    std::uint64_t leaf_cw = 0; // corrects the x == alpha path
};

// Keys for parties 0 and 1. Payload beta may be any ring element (0 yields a
// null function with the same key shape).
std::pair<DcfKey, DcfKey> dcf_gen(std::uint64_t alpha, RingElement beta,
                                  const FixedPointConfig& cfg, Rng& rng);

// Additive share of beta * 1{x <= alpha}; pure function of (key, x).
RingElement dcf_eval(int party, const DcfKey& key, std::uint64_t x, const FixedPointConfig& cfg);

} // namespace smpcfl
