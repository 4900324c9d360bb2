#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "smpcfl/ring.hpp"
#include "smpcfl/rng.hpp"

namespace smpcfl {

// One party's additive share of a secret vector. Shares of different parties
// must never be combined except through reconstruct(); the party index guards
// against accidental co-location.
struct ShareVector {
    int party = -1;    // index in [0, n_parties)
    int n_parties = 0; // total share count for this secret
    FixedPointConfig cfg;
    std::vector<RingElement> values;

    std::size_t size() const { return values.size(); }
};

// Split a secret into n additive shares: the first n-1 are uniform, the last
// makes the mod-N column sums match the secret.
std::vector<ShareVector> share(std::span<const RingElement> secret, int n_parties, Rng& rng,
                               const FixedPointConfig& cfg);

// Elementwise mod-N sum across all n shares. Requires every party exactly once.
std::vector<RingElement> reconstruct(std::span<const ShareVector> shares);

// Per-party elementwise share arithmetic. Operands must belong to the same
// party and have matching length and cfg.
ShareVector add_shares(const ShareVector& a, const ShareVector& b);
ShareVector sub_shares(const ShareVector& a, const ShareVector& b);

// Add a public vector: party 0 absorbs the constant, everyone else passes
// through, so the reconstruction shifts by exactly c.
ShareVector add_public(const ShareVector& a, std::span<const RingElement> c);

// Multiply every share by a public ring constant.
ShareVector mul_public(const ShareVector& a, RingElement c);

// Little-endian wire form: cfg.elem_bytes() bytes per element.
std::vector<std::uint8_t> serialize_elements(std::span<const RingElement> values,
                                             const FixedPointConfig& cfg);
std::vector<RingElement> deserialize_elements(std::span<const std::uint8_t> bytes,
                                              const FixedPointConfig& cfg);

} // namespace smpcfl
