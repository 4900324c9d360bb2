#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "smpcfl/dcf.hpp"
#include "smpcfl/ring.hpp"
#include "smpcfl/rng.hpp"
#include "smpcfl/sharing.hpp"

namespace smpcfl {

// One party's half of a multiplication triple: shares of uniform a, b and of
// c = a*b mod N, elementwise over a vector. Move-only; beaver_mul consumes it.
struct BeaverTriple {
    ShareVector a, b, c;
    bool consumed = false;

    BeaverTriple() = default;
    BeaverTriple(ShareVector a_, ShareVector b_, ShareVector c_)
        : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)) {}
    BeaverTriple(const BeaverTriple&) = delete;
    BeaverTriple& operator=(const BeaverTriple&) = delete;
    BeaverTriple(BeaverTriple&&) = default;
    BeaverTriple& operator=(BeaverTriple&&) = default;

    std::size_t size() const { return a.size(); }
};

// One party's half of a masked-comparison key. The two evaluations at a
// public x = y + a sum to 1{signed(y) <= 0}: dcf_hi tests x <= a, dcf_lo
// tests x <= a + N/2 - 1, and wrap_share corrects when the half-length
// interval wraps past zero. mask_share is this party's additive share of a.
struct ComparisonKey {
    RingElement mask_share;
    DcfKey dcf_hi;
    DcfKey dcf_lo;
    RingElement wrap_share;
    bool consumed = false;

    ComparisonKey() = default;
    ComparisonKey(const ComparisonKey&) = delete;
    ComparisonKey& operator=(const ComparisonKey&) = delete;
    ComparisonKey(ComparisonKey&&) = default;
    ComparisonKey& operator=(ComparisonKey&&) = default;
};

// Batch of `count` triples of vector length `len`; returns both parties'
// halves index-aligned.
std::pair<std::vector<BeaverTriple>, std::vector<BeaverTriple>>
gen_beaver(std::size_t count, std::size_t len, Rng& rng, const FixedPointConfig& cfg);

std::pair<ComparisonKey, ComparisonKey> gen_comparison_key(Rng& rng, const FixedPointConfig& cfg);

// Keygen for a caller-chosen mask; the random-mask overload draws the mask
// uniformly and delegates here.
std::pair<ComparisonKey, ComparisonKey> gen_comparison_key_for_mask(RingElement mask, Rng& rng,
                                                                    const FixedPointConfig& cfg);

// Additive share of the wrapped sign predicate at public x; pure function.
RingElement fss_eval(int party, const ComparisonKey& key, RingElement x,
                     const FixedPointConfig& cfg);

// Per-party correlated-randomness pool filled offline by the dealer. take()
// transfers ownership, so consumed material cannot be observed again.
class RandomnessPool {
public:
    RandomnessPool() = default;
    RandomnessPool(std::vector<BeaverTriple> triples, std::vector<ComparisonKey> keys)
        : triples_(std::move(triples)), keys_(std::move(keys)) {}

    BeaverTriple take_triple(std::size_t len);
    ComparisonKey take_key();

    std::size_t triples_left() const { return triples_.size() - triple_next_; }
    std::size_t keys_left() const { return keys_.size() - key_next_; }

    void add(std::vector<BeaverTriple> triples, std::vector<ComparisonKey> keys);

private:
    std::vector<BeaverTriple> triples_;
    std::vector<ComparisonKey> keys_;
    std::size_t triple_next_ = 0;
    std::size_t key_next_ = 0;
};

// Fill both parties' pools for a computation needing `n_triple_elems` scalar
// products (issued as length-1 triples) and `n_keys` comparisons.
std::pair<RandomnessPool, RandomnessPool> gen_pools(std::size_t n_triple_elems,
                                                    std::size_t n_keys, Rng& rng,
                                                    const FixedPointConfig& cfg);

// Binary correlated-randomness file, one per party: magic "SMPCFRND",
// version, cfg, party id, counts, then triple and key records.
void write_randomness_file(const std::string& path, int party, const FixedPointConfig& cfg,
                           const std::vector<BeaverTriple>& triples,
                           const std::vector<ComparisonKey>& keys);

struct RandomnessFile {
    int party = -1;
    FixedPointConfig cfg;
    std::vector<BeaverTriple> triples;
    std::vector<ComparisonKey> keys;
};

RandomnessFile read_randomness_file(const std::string& path);

} // namespace smpcfl
