#include "smpcfl/fedavg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "smpcfl/errors.hpp"
#include "smpcfl/mpc_ops.hpp"

namespace smpcfl {

void TrainingConfig::validate() const {
    if (rounds < 1 || local_epochs < 1 || batch_size < 1)
        throw ConfigError("training config: rounds, local_epochs, batch_size must be positive");
    if (lr < 0) throw ConfigError("training config: negative learning rate");
    if (parties != 2) throw ConfigError("training config: exactly 2 computing parties supported");
}

ModelParams local_train(HospitalState& h, const TrainingConfig& cfg, int round) {
    if (h.data.images.empty()) throw ConfigError("hospital " + std::to_string(h.id) + ": empty dataset");
    Rng rng(derive_seed(cfg.seed, "local-train",
                        (static_cast<std::uint64_t>(h.id) << 32) | static_cast<std::uint32_t>(round)));
    for (int e = 0; e < cfg.local_epochs; ++e)
        train_epoch(h.model, h.data.images, h.data.labels, h.data.shape, cfg.lr, cfg.batch_size, rng);
    return h.model;
}

namespace {

std::vector<double> flatten_params(const ModelParams& m) {
    std::vector<double> out;
    out.reserve(m.parameter_count());
    for (const auto& l : m.layers) {
        out.insert(out.end(), l.weights.begin(), l.weights.end());
        out.insert(out.end(), l.bias.begin(), l.bias.end());
    }
    return out;
}

void unflatten_params(ModelParams& m, std::span<const double> flat) {
    std::size_t pos = 0;
    for (auto& l : m.layers) {
        std::copy_n(flat.begin() + pos, l.weights.size(), l.weights.begin());
        pos += l.weights.size();
        std::copy_n(flat.begin() + pos, l.bias.size(), l.bias.begin());
        pos += l.bias.size();
    }
}

SharedModel shared_from_flat(int party, const ModelParams& reference, const FixedPointConfig& cfg,
                             const ShareVector& flat) {
    SharedModel m;
    m.party = party;
    m.cfg = cfg;
    std::size_t pos = 0;
    for (const auto& l : reference.layers) {
        SharedLayer sl;
        sl.spec = l.spec;
        sl.weights = make_2pc_share(party, cfg, {flat.values.begin() + pos,
                                                 flat.values.begin() + pos + l.weights.size()});
        pos += l.weights.size();
        sl.bias = make_2pc_share(party, cfg, {flat.values.begin() + pos,
                                              flat.values.begin() + pos + l.bias.size()});
        pos += l.bias.size();
        m.layers.push_back(std::move(sl));
    }
    return m;
}

struct AggregateRound {
    SharedModel p0, p1;
    ModelParams revealed; // filled only when reveal == true
    Transcript transcript;
};

// One network round: hospitals 0..n-1 deliver model shares to computing
// parties n and n+1; parties aggregate; optionally the global shares go back
// to every hospital. Hospital 0's reconstruction is returned.
AggregateRound run_aggregation_round(const std::vector<ModelParams>& models,
                                     const FixedPointConfig& cfg, const LinkModel& link,
                                     std::uint64_t seed, bool reveal, const SimOptions& opts,
                                     const std::vector<bool>* deliver_mask = nullptr) {
    const int n = static_cast<int>(models.size());
    if (n < 2) throw ConfigError("secure_aggregate needs at least 2 hospitals");
    const std::size_t n_params = models[0].parameter_count();
    for (const auto& m : models)
        if (m.parameter_count() != n_params)
            throw ConfigError("secure_aggregate: model shapes differ");

    const auto [scale, shift] = aggregation_scale(n, cfg);
    const int pa = n, pb = n + 1;

    AggregateRound result;
    std::vector<std::vector<double>> revealed_per_hospital(n);

    auto hospital_program = [&](int id) {
        return [&, id](PartyCtx& ctx) {
            if (deliver_mask && !(*deliver_mask)[id]) return; // simulated dropout
            std::vector<RingElement> enc(n_params);
            const auto flat = flatten_params(models[id]);
            for (std::size_t i = 0; i < n_params; ++i) enc[i] = encode_fixed(flat[i], cfg);
            auto shares = share(enc, 2, ctx.rng(), cfg);
            ctx.send(pa, serialize_elements(shares[0].values, cfg), tag::kShare);
            ctx.send(pb, serialize_elements(shares[1].values, cfg), tag::kShare);
            ctx.tick(2 * n_params);
            if (reveal) {
                const auto s0 = deserialize_elements(ctx.recv(pa), cfg);
                const auto s1 = deserialize_elements(ctx.recv(pb), cfg);
                std::vector<double> out(n_params);
                for (std::size_t i = 0; i < n_params; ++i)
                    out[i] = decode_fixed(ring_add(s0[i], s1[i], cfg), cfg);
                revealed_per_hospital[id] = std::move(out);
            }
        };
    };

    auto party_program = [&](int party) {
        return [&, party](PartyCtx& ctx) {
            ShareVector acc = make_2pc_share(party, cfg,
                                             std::vector<RingElement>(n_params, RingElement{0}));
            for (int h = 0; h < n; ++h) {
                auto vals = deserialize_elements(ctx.recv(h), cfg);
                if (vals.size() != n_params)
                    throw ProtocolError("aggregation: hospital " + std::to_string(h) +
                                        " delivered wrong share length");
                acc = add_shares(acc, make_2pc_share(party, cfg, std::move(vals)));
            }
            acc = truncate(mul_public(acc, scale), shift);
            ctx.tick(3 * n_params);
            (party == 0 ? result.p0 : result.p1) =
                shared_from_flat(party, models[0], cfg, acc);
            if (reveal) {
                const auto bytes = serialize_elements(acc.values, cfg);
                for (int h = 0; h < n; ++h) ctx.send(h, bytes, tag::kRevealGlobal);
            }
        };
    };

    std::vector<PartyProgram> programs;
    for (int h = 0; h < n; ++h) programs.push_back(hospital_program(h));
    programs.push_back(party_program(0));
    programs.push_back(party_program(1));
    result.transcript = run_parties(std::move(programs), link, seed, opts);

    if (reveal) {
        result.revealed = models[0];
        unflatten_params(result.revealed, revealed_per_hospital[0]);
        for (int h = 1; h < n; ++h)
            if (revealed_per_hospital[h] != revealed_per_hospital[0])
                throw ProtocolError("hospitals reconstructed different global models");
    }
    return result;
}

} // namespace

std::pair<RingElement, int> aggregation_scale(int n_models, const FixedPointConfig& cfg) {
    if (n_models < 1) throw ConfigError("aggregation_scale: empty federation");
    // Guard bits sharpen the public 1/n reciprocal; without them the scaling
    // error grows with n * |param|. Falls back to plain f when the ring is
    // too narrow for the extra product headroom.
    const int guard = std::clamp(cfg.ring_bits - 2 * cfg.frac_bits - 6, 0, 8);
    const int shift = cfg.frac_bits + guard;
    const double c = std::ldexp(1.0, shift) / static_cast<double>(n_models);
    return {RingElement{static_cast<std::uint64_t>(std::llround(c)) & cfg.mask()}, shift};
}

AggregationResult secure_aggregate(const std::vector<ModelParams>& models,
                                   const FixedPointConfig& cfg, const LinkModel& link,
                                   std::uint64_t seed, const SimOptions& opts) {
    auto round = run_aggregation_round(models, cfg, link, seed, /*reveal=*/false, opts);
    return AggregationResult{std::move(round.p0), std::move(round.p1),
                             std::move(round.transcript)};
}

FlResult fl_run(std::vector<HospitalState>& hospitals, const TrainingConfig& cfg,
                const FixedPointConfig& ring_cfg, const LinkModel& link,
                const Dataset& validation, bool plain_aggregation) {
    cfg.validate();
    if (hospitals.empty()) throw ConfigError("fl_run: no hospitals");
    FlResult result;

    for (int round = 1; round <= cfg.rounds; ++round) {
        std::vector<ModelParams> locals;
        locals.reserve(hospitals.size());
        for (auto& h : hospitals) locals.push_back(local_train(h, cfg, round));

        ModelParams global;
        std::uint64_t round_bytes = 0;
        double round_ms = 0;
        std::vector<std::uint64_t> hospital_bytes(hospitals.size(), 0);
        std::vector<double> hospital_ms(hospitals.size(), 0);

        if (hospitals.size() == 1) {
            global = locals[0]; // degenerate federation: plain local training
        } else if (plain_aggregation) {
            global = fedavg_plain(locals);
        } else {
            try {
                auto agg = run_aggregation_round(locals, ring_cfg, link,
                                                 derive_seed(cfg.seed, "round", round),
                                                 /*reveal=*/true, SimOptions{});
                global = std::move(agg.revealed);
                round_bytes = agg.transcript.total_bytes();
                round_ms = agg.transcript.max_clock_ns() / 1e6;
                result.transcript_hashes.push_back(agg.transcript.hash());
                for (std::size_t h = 0; h < hospitals.size(); ++h) {
                    hospital_bytes[h] = agg.transcript.sent_bytes[h];
                    hospital_ms[h] = agg.transcript.clock_ns[h] / 1e6;
                }
                if (round == cfg.rounds) {
                    result.shared0 = std::move(agg.p0);
                    result.shared1 = std::move(agg.p1);
                }
            } catch (const ProtocolError&) {
                MetricsRow abort_row;
                abort_row.round = round;
                abort_row.entity = "global";
                abort_row.split = "abort";
                result.metrics.push_back(abort_row);
                throw;
            }
        }

        for (auto& h : hospitals) h.model = global;

        for (std::size_t hi = 0; hi < hospitals.size(); ++hi) {
            const auto& h = hospitals[hi];
            MetricsRow row;
            row.round = round;
            row.entity = "h" + std::to_string(h.id);
            row.split = "train";
            row.accuracy = accuracy(global, h.data.images, h.data.labels, h.data.shape);
            row.loss = cross_entropy_loss(global, h.data.images, h.data.labels, h.data.shape);
            row.bytes_sent = hospital_bytes[hi];
            row.wall_ms = hospital_ms[hi];
            result.metrics.push_back(std::move(row));
        }
        MetricsRow vrow;
        vrow.round = round;
        vrow.entity = "global";
        vrow.split = "val";
        vrow.accuracy = accuracy(global, validation.images, validation.labels, validation.shape);
        vrow.loss = cross_entropy_loss(global, validation.images, validation.labels, validation.shape);
        vrow.bytes_sent = round_bytes;
        vrow.wall_ms = round_ms;
        result.metrics.push_back(std::move(vrow));

        result.global = std::move(global);
    }

    // Keep a shared cloud copy even in plain mode or single-hospital runs.
    if (result.shared0.layers.empty()) {
        Rng rng(derive_seed(cfg.seed, "cloud-share"));
        auto [p0, p1] = encrypt_model(result.global, ring_cfg, rng);
        result.shared0 = std::move(p0);
        result.shared1 = std::move(p1);
    }
    return result;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open metrics file for writing: " + path);
    os << "round,entity,split,accuracy,loss,bytes_sent,wall_ms\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%s,%.6f,%.6f,%llu,%.6f\n", r.round,
                      r.entity.c_str(), r.split.c_str(), r.accuracy, r.loss,
                      static_cast<unsigned long long>(r.bytes_sent), r.wall_ms);
        os << buf;
    }
}

} // namespace smpcfl
