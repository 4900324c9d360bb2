#pragma once

#include <array>
#include <cstdint>

namespace smpcfl {

// Name recorded in transcript headers so a run can be replayed bit-exactly.
inline constexpr const char* kPrgName = "chacha20";

// 128-bit PRG seed for the FSS tree.
struct Seed128 {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;

    friend Seed128 operator^(Seed128 a, Seed128 b) { return {a.lo ^ b.lo, a.hi ^ b.hi}; }
    friend bool operator==(Seed128 a, Seed128 b) { return a.lo == b.lo && a.hi == b.hi; }
};

// One ChaCha20 block keyed by the 128-bit seed; fills 16 output words.
void chacha20_block(const Seed128& seed, std::uint32_t counter, std::uint32_t stream,
                    std::array<std::uint32_t, 16>& out);

// GGM node expansion: seed -> (left seed, right seed, two flag bits, two
// value words). One ChaCha block supplies all of it.
struct NodeExpansion {
    Seed128 seed_l, seed_r;
    std::uint8_t t_l = 0, t_r = 0;
    std::uint64_t v_l = 0, v_r = 0;
};

NodeExpansion prg_expand(const Seed128& seed);

} // namespace smpcfl
