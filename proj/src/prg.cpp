#include "smpcfl/prg.hpp"

namespace smpcfl {

namespace {

inline std::uint32_t rotl(std::uint32_t x, int n) { return (x << n) | (x >> (32 - n)); }

inline void quarter_round(std::uint32_t& a, std::uint32_t& b, std::uint32_t& c, std::uint32_t& d) {
    a += b; d ^= a; d = rotl(d, 16);
    c += d; b ^= c; b = rotl(b, 12);
    a += b; d ^= a; d = rotl(d, 8);
    c += d; b ^= c; b = rotl(b, 7);
}

} // namespace

void chacha20_block(const Seed128& seed, std::uint32_t counter, std::uint32_t stream,
                    std::array<std::uint32_t, 16>& out) {
    // 128-bit seeds are expanded to the 256-bit key slot by repetition; the
    // "expand 32-byte k" constants are the RFC 8439 values.
    std::array<std::uint32_t, 16> s{};
    s[0] = 0x61707865u; s[1] = 0x3320646eu; s[2] = 0x79622d32u; s[3] = 0x6b206574u;
    s[4] = static_cast<std::uint32_t>(seed.lo);
    s[5] = static_cast<std::uint32_t>(seed.lo >> 32);
    s[6] = static_cast<std::uint32_t>(seed.hi);
    s[7] = static_cast<std::uint32_t>(seed.hi >> 32);
    s[8] = s[4]; s[9] = s[5]; s[10] = s[6]; s[11] = s[7];
    s[12] = counter;
    s[13] = stream;
    s[14] = 0x736d7063u; // "smpc"
    s[15] = 0x66727364u; // "frsd"

    std::array<std::uint32_t, 16> x = s;
    for (int round = 0; round < 10; ++round) {
        quarter_round(x[0], x[4], x[8], x[12]);
        quarter_round(x[1], x[5], x[9], x[13]);
        quarter_round(x[2], x[6], x[10], x[14]);
        quarter_round(x[3], x[7], x[11], x[15]);
        quarter_round(x[0], x[5], x[10], x[15]);
        quarter_round(x[1], x[6], x[11], x[12]);
        quarter_round(x[2], x[7], x[8], x[13]);
        quarter_round(x[3], x[4], x[9], x[14]);
    }
    for (int i = 0; i < 16; ++i) out[i] = x[i] + s[i];
}

NodeExpansion prg_expand(const Seed128& seed) {
    std::array<std::uint32_t, 16> w{};
    chacha20_block(seed, 0, 0, w);
    NodeExpansion e;
    e.seed_l = {static_cast<std::uint64_t>(w[0]) | (static_cast<std::uint64_t>(w[1]) << 32),
                static_cast<std::uint64_t>(w[2]) | (static_cast<std::uint64_t>(w[3]) << 32)};
    e.seed_r = {static_cast<std::uint64_t>(w[4]) | (static_cast<std::uint64_t>(w[5]) << 32),
                static_cast<std::uint64_t>(w[6]) | (static_cast<std::uint64_t>(w[7]) << 32)};
    e.v_l = static_cast<std::uint64_t>(w[8]) | (static_cast<std::uint64_t>(w[9]) << 32);
    e.v_r = static_cast<std::uint64_t>(w[10]) | (static_cast<std::uint64_t>(w[11]) << 32);
    e.t_l = static_cast<std::uint8_t>(w[12] & 1u);
    e.t_r = static_cast<std::uint8_t>((w[12] >> 1) & 1u);
    return e;
}

} // namespace smpcfl
