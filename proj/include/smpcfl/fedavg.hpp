#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smpcfl/dataset.hpp"
#include "smpcfl/nn.hpp"
#include "smpcfl/simnet.hpp"

namespace smpcfl {

struct TrainingConfig {
    int rounds = 15;       // FL rounds ("epochs" in the metrics)
    int local_epochs = 1;  // SGD epochs between aggregations
    double lr = 0.1;
    int batch_size = 16;
    std::uint64_t seed = 7;
    int parties = 2; // computing parties for the aggregation

    void validate() const;
};

struct HospitalState {
    int id = 0;
    Dataset data;
    ModelParams model;
};

// Plaintext mini-batch SGD at the hospital's edge server; deterministic for
// a fixed (seed, round) pair. Returns the updated local model.
ModelParams local_train(HospitalState& h, const TrainingConfig& cfg, int round);

// Hospitals share their encoded models to the two computing parties, which
// sum locally and scale by a public 1/n with guard-bit precision. The result
// stays shared; transcript covers delivery only.
struct AggregationResult {
    SharedModel p0, p1;
    Transcript transcript;
};

AggregationResult secure_aggregate(const std::vector<ModelParams>& models,
                                   const FixedPointConfig& cfg, const LinkModel& link,
                                   std::uint64_t seed, const SimOptions& opts = {});

// Reciprocal scale factor and shift used by the aggregation: value is
// round(2^(f+g) / n) applied with a truncation by f+g. Exposed for the
// exactness analysis in tests.
std::pair<RingElement, int> aggregation_scale(int n_models, const FixedPointConfig& cfg);

struct MetricsRow {
    int round = 0;
    std::string entity; // hospital id or "global"
    std::string split;  // "train", "val", or "abort"
    double accuracy = 0;
    double loss = 0;
    std::uint64_t bytes_sent = 0;
    double wall_ms = 0; // simulated time
};

struct FlResult {
    std::vector<MetricsRow> metrics;
    ModelParams global;
    SharedModel shared0, shared1;               // cloud-resident encrypted copy
    std::vector<std::uint64_t> transcript_hashes; // one per secure round
};

// Full federated loop: local training, secure (or plain) aggregation, reveal
// of the global model to hospitals, per-round metrics.
FlResult fl_run(std::vector<HospitalState>& hospitals, const TrainingConfig& cfg,
                const FixedPointConfig& ring_cfg, const LinkModel& link,
                const Dataset& validation, bool plain_aggregation = false);

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

} // namespace smpcfl
