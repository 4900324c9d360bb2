#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smpcfl/ring.hpp"

namespace smpcfl {

struct DatasetConfig {
    std::string type = "synthetic"; // "synthetic" | "pgm"
    int classes = 2;
    int per_class = 64;
    double noise = 0.05;
    std::string root; // pgm root directory
};

struct TrainSection {
    int hospitals = 4;
    int rounds = 15;
    int local_epochs = 1;
    double lr = 0.1;
    int batch_size = 16;
    bool plain_aggregation = false;
    DatasetConfig dataset;
    std::string out_dir = "out";
};

struct InferSection {
    std::string model = "out/global"; // file prefix: <model>.model / .p0.model / .p1.model
    std::vector<int> batch_sizes = {5, 10, 15, 20, 30};
    int test_samples = 100;
    DatasetConfig dataset;
    std::string out_dir = "out";
};

struct RandomnessSection {
    std::uint64_t triples = 1000;
    std::uint64_t keys = 100;
    std::string out_prefix = "out/randomness";
};

// One JSON document per run; unknown keys are rejected, defaults printable.
struct ExperimentConfig {
    std::uint64_t seed = 7;
    FixedPointConfig ring{64, 16};
    std::string link = "6g";
    double compute_ops_per_s = 1e6;
    TrainSection train;
    InferSection infer;
    RandomnessSection randomness;
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<inline>");
std::string config_to_json(const ExperimentConfig& c);

} // namespace smpcfl
