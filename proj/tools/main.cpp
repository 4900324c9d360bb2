#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "smpcfl/audit.hpp"
#include "smpcfl/config.hpp"
#include "smpcfl/dataset.hpp"
#include "smpcfl/dealer.hpp"
#include "smpcfl/errors.hpp"
#include "smpcfl/fedavg.hpp"
#include "smpcfl/log.hpp"
#include "smpcfl/nn.hpp"
#include "smpcfl/secure_nn.hpp"
#include "smpcfl/selftest.hpp"

namespace fs = std::filesystem;
using namespace smpcfl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitSelftest = 4;

struct CommonFlags {
    std::string config_path;
    std::string link_override;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    bool plain_aggregation = false;
    bool print_config = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON experiment config");
    cmd->add_option("--seed", flags.seed_override, "override config seed")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--link", flags.link_override, "link preset (6g or 4g)")
        ->check(CLI::IsMember({"6g", "4g"}));
    cmd->add_flag("--print-config", flags.print_config, "print effective config and exit");
}

ExperimentConfig load_config(const CommonFlags& flags) {
    ExperimentConfig cfg =
        flags.config_path.empty() ? ExperimentConfig{} : parse_config_file(flags.config_path);
    if (flags.seed_set) cfg.seed = flags.seed_override;
    if (!flags.link_override.empty()) cfg.link = flags.link_override;
    if (flags.plain_aggregation) cfg.train.plain_aggregation = true;
    return cfg;
}

Dataset build_dataset(const DatasetConfig& d, std::uint64_t seed, const char* role) {
    if (d.type == "pgm") return load_pgm_directory(d.root);
    return make_blob_dataset(d.classes, d.per_class, d.noise, derive_seed(seed, role));
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open for writing: " + path);
    os << text;
}

int cmd_train(const CommonFlags& flags) {
    const ExperimentConfig cfg = load_config(flags);
    if (flags.print_config) {
        std::cout << config_to_json(cfg);
        return kExitOk;
    }
    fs::create_directories(cfg.train.out_dir);
    const LinkModel link = link_preset(cfg.link);

    Dataset all = build_dataset(cfg.train.dataset, cfg.seed, "train-data");
    Dataset val = build_dataset(cfg.train.dataset, cfg.seed, "val-data");
    auto shards = partition_dataset(all, cfg.train.hospitals);

    Rng init_rng(derive_seed(cfg.seed, "model-init"));
    const ModelParams init = make_reference_model(all.num_classes, init_rng);

    std::vector<HospitalState> hospitals;
    for (int i = 0; i < cfg.train.hospitals; ++i)
        hospitals.push_back(HospitalState{i, std::move(shards[i]), init});

    TrainingConfig tc;
    tc.rounds = cfg.train.rounds;
    tc.local_epochs = cfg.train.local_epochs;
    tc.lr = cfg.train.lr;
    tc.batch_size = cfg.train.batch_size;
    tc.seed = cfg.seed;

    const std::string metrics_path = cfg.train.out_dir + "/train_metrics.csv";
    FlResult result;
    try {
        result = fl_run(hospitals, tc, cfg.ring, link, val, cfg.train.plain_aggregation);
    } catch (const ProtocolError&) {
        SMPCFL_LOG_ERROR("federated run aborted; see metrics for the failing round");
        throw;
    }
    write_metrics_csv(metrics_path, result.metrics);

    // gnuplot-friendly per-round accuracy columns.
    {
        std::ofstream dat(cfg.train.out_dir + "/train_accuracy.dat");
        dat << "# round mean_train_accuracy val_accuracy\n";
        for (int r = 1; r <= tc.rounds; ++r) {
            double train_sum = 0;
            int train_n = 0;
            double val_acc = 0;
            for (const auto& row : result.metrics) {
                if (row.round != r) continue;
                if (row.split == "train") {
                    train_sum += row.accuracy;
                    ++train_n;
                } else if (row.split == "val") {
                    val_acc = row.accuracy;
                }
            }
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%d %.6f %.6f\n", r,
                          train_n ? train_sum / train_n : 0.0, val_acc);
            dat << buf;
        }
    }

    write_model_file(cfg.train.out_dir + "/global.model", result.global, cfg.ring);
    write_shared_model_file(cfg.train.out_dir + "/global.p0.model", result.shared0);
    write_shared_model_file(cfg.train.out_dir + "/global.p1.model", result.shared1);

    {
        std::ofstream hs(cfg.train.out_dir + "/train_transcripts.txt");
        for (std::size_t i = 0; i < result.transcript_hashes.size(); ++i) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "round %zu hash %016llx\n", i + 1,
                          static_cast<unsigned long long>(result.transcript_hashes[i]));
            hs << buf;
        }
    }

    double final_val = 0;
    for (const auto& row : result.metrics)
        if (row.split == "val" && row.round == tc.rounds) final_val = row.accuracy;
    std::cout << "train: " << cfg.train.hospitals << " hospitals, " << tc.rounds
              << " rounds, final validation accuracy " << final_val << "\n"
              << "train: metrics written to " << metrics_path << "\n";
    return kExitOk;
}

int cmd_infer(const CommonFlags& flags) {
    const ExperimentConfig cfg = load_config(flags);
    if (flags.print_config) {
        std::cout << config_to_json(cfg);
        return kExitOk;
    }
    fs::create_directories(cfg.infer.out_dir);
    const LinkModel link = link_preset(cfg.link);

    const std::string p0_path = cfg.infer.model + ".p0.model";
    const std::string p1_path = cfg.infer.model + ".p1.model";
    for (const auto& p : {p0_path, p1_path})
        if (!fs::exists(p)) throw ConfigError("missing shared model file: " + p);
    const SharedModel m0 = read_shared_model_file(p0_path);
    const SharedModel m1 = read_shared_model_file(p1_path);

    Dataset test = build_dataset(cfg.infer.dataset, cfg.seed, "test-data");
    const int max_batch = *std::max_element(cfg.infer.batch_sizes.begin(),
                                            cfg.infer.batch_sizes.end());
    if (static_cast<int>(test.size()) < max_batch)
        throw ConfigError("test dataset smaller than largest batch size");

    SimOptions opts;
    opts.compute_ops_per_s = cfg.compute_ops_per_s;

    std::ofstream batches(cfg.infer.out_dir + "/infer_metrics.csv");
    batches << "batch_size,images,accuracy,sim_ms,bytes\n";
    std::ofstream preds(cfg.infer.out_dir + "/infer_predictions.csv");
    preds << "batch_size,sample_index,prediction,label\n";
    std::ofstream dat(cfg.infer.out_dir + "/infer_time.dat");
    dat << "# batch_size sim_ms\n";
    std::ofstream hashes(cfg.infer.out_dir + "/infer_transcripts.txt");

    const auto wall_start = std::chrono::steady_clock::now();
    for (int b : cfg.infer.batch_sizes) {
        std::vector<std::vector<double>> images(test.images.begin(), test.images.begin() + b);
        const auto run = run_encrypted_inference_shared(m0, m1, images, test.shape,
                                                        derive_seed(cfg.seed, "infer"), link, opts);
        const auto audit = audit_transcript(run.transcript);
        if (!audit.ok) throw ProtocolError("transcript audit failed: " + audit.violations[0]);

        int hits = 0;
        for (int i = 0; i < b; ++i) {
            if (run.predictions[i] == test.labels[i]) ++hits;
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d\n", b, i, run.predictions[i],
                          test.labels[i]);
            preds << buf;
        }
        const double acc = static_cast<double>(hits) / b;
        const double sim_ms = run.transcript.max_clock_ns() / 1e6;
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%d,%d,%.6f,%.6f,%llu\n", b, b, acc, sim_ms,
                      static_cast<unsigned long long>(run.transcript.total_bytes()));
        batches << buf;
        std::snprintf(buf, sizeof(buf), "%d %.6f\n", b, sim_ms);
        dat << buf;
        std::snprintf(buf, sizeof(buf), "batch %d hash %016llx\n", b,
                      static_cast<unsigned long long>(run.transcript.hash()));
        hashes << buf;
    }
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wall_start)
            .count();
    SMPCFL_LOG_INFO("infer: real elapsed %.1f ms (CSV carries simulated time only)", wall_ms);
    std::cout << "infer: batch metrics written to " << cfg.infer.out_dir << "/infer_metrics.csv\n";
    return kExitOk;
}

int cmd_gen_randomness(const CommonFlags& flags) {
    const ExperimentConfig cfg = load_config(flags);
    if (flags.print_config) {
        std::cout << config_to_json(cfg);
        return kExitOk;
    }
    const fs::path prefix(cfg.randomness.out_prefix);
    if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
    Rng rng(derive_seed(cfg.seed, "dealer-file"));
    auto [t0, t1] = gen_beaver(cfg.randomness.triples, 1, rng, cfg.ring);
    std::vector<ComparisonKey> k0, k1;
    for (std::uint64_t i = 0; i < cfg.randomness.keys; ++i) {
        auto [a, b] = gen_comparison_key(rng, cfg.ring);
        k0.push_back(std::move(a));
        k1.push_back(std::move(b));
    }
    const std::string f0 = cfg.randomness.out_prefix + ".p0.rnd";
    const std::string f1 = cfg.randomness.out_prefix + ".p1.rnd";
    write_randomness_file(f0, 0, cfg.ring, t0, k0);
    write_randomness_file(f1, 1, cfg.ring, t1, k1);
    std::cout << "gen-randomness: wrote " << f0 << " and " << f1 << " ("
              << cfg.randomness.triples << " triples, " << cfg.randomness.keys << " keys)\n";
    return kExitOk;
}

int cmd_selftest(const CommonFlags& flags, const std::string& randomness_prefix) {
    const ExperimentConfig cfg = load_config(flags);
    if (flags.print_config) {
        std::cout << config_to_json(cfg);
        return kExitOk;
    }
    std::string p0, p1;
    if (!randomness_prefix.empty()) {
        p0 = randomness_prefix + ".p0.rnd";
        p1 = randomness_prefix + ".p1.rnd";
    }
    const auto results = run_selftest(p0, p1);
    const bool ok = report_selftest(results, std::cout);
    return ok ? kExitOk : kExitSelftest;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SMPC federated-learning simulator: secret-shared aggregation and encrypted "
                 "CNN inference over a deterministic in-process network"};
    app.require_subcommand(1);

    CommonFlags train_flags, infer_flags, rnd_flags, selftest_flags, print_flags;
    std::string selftest_randomness;

    auto* train = app.add_subcommand("train", "federated training with encrypted aggregation");
    add_common(train, train_flags);
    train->add_flag("--plain-aggregation", train_flags.plain_aggregation,
                    "aggregate with plaintext FedAvg instead of MPC");

    auto* infer = app.add_subcommand("infer", "encrypted inference over batch sizes");
    add_common(infer, infer_flags);

    auto* rnd = app.add_subcommand("gen-randomness", "dealer: write correlated-randomness files");
    add_common(rnd, rnd_flags);

    auto* selftest = app.add_subcommand("selftest", "run the release-gate protocol suites");
    add_common(selftest, selftest_flags);
    selftest->add_option("--randomness", selftest_randomness,
                         "validate <prefix>.p0.rnd/.p1.rnd instead of fresh material");

    auto* print = app.add_subcommand("print-config", "print the effective config as JSON");
    add_common(print, print_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (train->parsed()) return cmd_train(train_flags);
        if (infer->parsed()) return cmd_infer(infer_flags);
        if (rnd->parsed()) return cmd_gen_randomness(rnd_flags);
        if (selftest->parsed()) return cmd_selftest(selftest_flags, selftest_randomness);
        if (print->parsed()) {
            std::cout << config_to_json(load_config(print_flags));
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ProtocolError& e) {
        std::cerr << "protocol abort: " << e.what() << "\n";
        return kExitProtocol;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
