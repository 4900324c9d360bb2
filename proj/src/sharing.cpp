#include "smpcfl/sharing.hpp"

#include <string>

#include "smpcfl/errors.hpp"

namespace smpcfl {

namespace {

void require_same_party(const ShareVector& a, const ShareVector& b) {
    if (a.party != b.party || a.n_parties != b.n_parties)
        throw ProtocolError("share operands belong to different parties (" +
                            std::to_string(a.party) + " vs " + std::to_string(b.party) + ")");
    if (a.size() != b.size()) throw ProtocolError("share length mismatch");
    if (!(a.cfg == b.cfg)) throw ProtocolError("share cfg mismatch");
}

} // namespace

std::vector<ShareVector> share(std::span<const RingElement> secret, int n_parties, Rng& rng,
                               const FixedPointConfig& cfg) {
    if (n_parties < 2) throw ConfigError("sharing requires at least 2 parties");
    std::vector<ShareVector> out(n_parties);
    for (int p = 0; p < n_parties; ++p) {
        out[p].party = p;
        out[p].n_parties = n_parties;
        out[p].cfg = cfg;
        out[p].values.resize(secret.size());
    }
    for (std::size_t j = 0; j < secret.size(); ++j) {
        RingElement acc{0};
        for (int p = 0; p + 1 < n_parties; ++p) {
            RingElement r = rng.ring(cfg);
            out[p].values[j] = r;
            acc = ring_add(acc, r, cfg);
        }
        out[n_parties - 1].values[j] = ring_sub(secret[j], acc, cfg);
    }
    return out;
}

std::vector<RingElement> reconstruct(std::span<const ShareVector> shares) {
    if (shares.empty()) throw ProtocolError("reconstruct: no shares");
    const int n = shares[0].n_parties;
    if (static_cast<int>(shares.size()) != n)
        throw ProtocolError("reconstruct: have " + std::to_string(shares.size()) +
                            " shares, need " + std::to_string(n));
    const FixedPointConfig cfg = shares[0].cfg;
    const std::size_t len = shares[0].size();
    std::vector<bool> seen(n, false);
    for (const auto& s : shares) {
        if (s.n_parties != n || s.party < 0 || s.party >= n)
            throw ProtocolError("reconstruct: inconsistent party metadata");
        if (seen[s.party]) throw ProtocolError("reconstruct: duplicate share for party " +
                                               std::to_string(s.party));
        seen[s.party] = true;
        if (s.size() != len || !(s.cfg == cfg))
            throw ProtocolError("reconstruct: length or cfg mismatch");
    }
    std::vector<RingElement> out(len, RingElement{0});
    for (const auto& s : shares)
        for (std::size_t j = 0; j < len; ++j) out[j] = ring_add(out[j], s.values[j], cfg);
    return out;
}

ShareVector add_shares(const ShareVector& a, const ShareVector& b) {
    require_same_party(a, b);
    ShareVector out = a;
    for (std::size_t j = 0; j < out.size(); ++j)
        out.values[j] = ring_add(a.values[j], b.values[j], a.cfg);
    return out;
}

ShareVector sub_shares(const ShareVector& a, const ShareVector& b) {
    require_same_party(a, b);
    ShareVector out = a;
    for (std::size_t j = 0; j < out.size(); ++j)
        out.values[j] = ring_sub(a.values[j], b.values[j], a.cfg);
    return out;
}

ShareVector add_public(const ShareVector& a, std::span<const RingElement> c) {
    if (c.size() != a.size()) throw ProtocolError("add_public: length mismatch");
    ShareVector out = a;
    if (a.party == 0)
        for (std::size_t j = 0; j < out.size(); ++j)
            out.values[j] = ring_add(a.values[j], c[j], a.cfg);
    return out;
}

ShareVector mul_public(const ShareVector& a, RingElement c) {
    ShareVector out = a;
    for (std::size_t j = 0; j < out.size(); ++j)
        out.values[j] = ring_mul(a.values[j], c, a.cfg);
    return out;
}

std::vector<std::uint8_t> serialize_elements(std::span<const RingElement> values,
                                             const FixedPointConfig& cfg) {
    const int eb = cfg.elem_bytes();
    std::vector<std::uint8_t> out;
    out.reserve(values.size() * eb);
    for (RingElement e : values)
        for (int i = 0; i < eb; ++i) out.push_back(static_cast<std::uint8_t>(e.v >> (8 * i)));
    return out;
}

std::vector<RingElement> deserialize_elements(std::span<const std::uint8_t> bytes,
                                              const FixedPointConfig& cfg) {
    const int eb = cfg.elem_bytes();
    if (bytes.size() % eb != 0) throw ProtocolError("element payload not a multiple of element size");
    std::vector<RingElement> out(bytes.size() / eb);
    for (std::size_t j = 0; j < out.size(); ++j) {
        std::uint64_t v = 0;
        for (int i = 0; i < eb; ++i)
            v |= static_cast<std::uint64_t>(bytes[j * eb + i]) << (8 * i);
        out[j] = ring_reduce(v, cfg);
    }
    return out;
}

} // namespace smpcfl
