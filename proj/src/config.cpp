#include "smpcfl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "smpcfl/errors.hpp"

namespace smpcfl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + ": " + what);
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& path) {
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) fail(path + "/" + key, "unknown key");
}

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& path) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(path + "/" + key, e.what());
    }
}

DatasetConfig parse_dataset(const json& j, const std::string& path) {
    DatasetConfig d;
    reject_unknown(j, {"type", "classes", "per_class", "noise", "root"}, path);
    read_field(j, "type", d.type, path);
    read_field(j, "classes", d.classes, path);
    read_field(j, "per_class", d.per_class, path);
    read_field(j, "noise", d.noise, path);
    read_field(j, "root", d.root, path);
    if (d.type != "synthetic" && d.type != "pgm")
        fail(path + "/type", "must be 'synthetic' or 'pgm'");
    if (d.type == "pgm" && d.root.empty()) fail(path + "/root", "required for pgm datasets");
    if (d.classes < 2) fail(path + "/classes", "need at least 2 classes");
    if (d.per_class < 1) fail(path + "/per_class", "must be positive");
    if (d.noise < 0) fail(path + "/noise", "must be non-negative");
    return d;
}

ExperimentConfig parse_json(const json& j) {
    ExperimentConfig c;
    reject_unknown(j, {"seed", "ring", "link", "compute_ops_per_s", "train", "infer", "randomness"},
                   "");
    read_field(j, "seed", c.seed, "");
    read_field(j, "link", c.link, "");
    read_field(j, "compute_ops_per_s", c.compute_ops_per_s, "");
    if (c.compute_ops_per_s <= 0) fail("/compute_ops_per_s", "must be positive");

    if (j.contains("ring")) {
        const auto& r = j.at("ring");
        reject_unknown(r, {"k", "f"}, "/ring");
        read_field(r, "k", c.ring.ring_bits, "/ring");
        read_field(r, "f", c.ring.frac_bits, "/ring");
    }
    try {
        c.ring.validate();
    } catch (const ConfigError& e) {
        fail("/ring", e.what());
    }

    if (j.contains("train")) {
        const auto& t = j.at("train");
        reject_unknown(t,
                       {"hospitals", "rounds", "local_epochs", "lr", "batch_size",
                        "plain_aggregation", "dataset", "out_dir"},
                       "/train");
        read_field(t, "hospitals", c.train.hospitals, "/train");
        read_field(t, "rounds", c.train.rounds, "/train");
        read_field(t, "local_epochs", c.train.local_epochs, "/train");
        read_field(t, "lr", c.train.lr, "/train");
        read_field(t, "batch_size", c.train.batch_size, "/train");
        read_field(t, "plain_aggregation", c.train.plain_aggregation, "/train");
        read_field(t, "out_dir", c.train.out_dir, "/train");
        if (t.contains("dataset")) c.train.dataset = parse_dataset(t.at("dataset"), "/train/dataset");
        if (c.train.hospitals < 1) fail("/train/hospitals", "must be positive");
        if (c.train.rounds < 1) fail("/train/rounds", "must be positive");
        if (c.train.local_epochs < 1) fail("/train/local_epochs", "must be positive");
        if (c.train.batch_size < 1) fail("/train/batch_size", "must be positive");
        if (c.train.lr < 0) fail("/train/lr", "must be non-negative");
    }

    if (j.contains("infer")) {
        const auto& t = j.at("infer");
        reject_unknown(t, {"model", "batch_sizes", "test_samples", "dataset", "out_dir"}, "/infer");
        read_field(t, "model", c.infer.model, "/infer");
        read_field(t, "batch_sizes", c.infer.batch_sizes, "/infer");
        read_field(t, "test_samples", c.infer.test_samples, "/infer");
        read_field(t, "out_dir", c.infer.out_dir, "/infer");
        if (t.contains("dataset")) c.infer.dataset = parse_dataset(t.at("dataset"), "/infer/dataset");
        if (c.infer.batch_sizes.empty()) fail("/infer/batch_sizes", "must not be empty");
        for (int b : c.infer.batch_sizes)
            if (b < 1) fail("/infer/batch_sizes", "entries must be positive");
        if (c.infer.test_samples < 1) fail("/infer/test_samples", "must be positive");
    }

    if (j.contains("randomness")) {
        const auto& t = j.at("randomness");
        reject_unknown(t, {"triples", "keys", "out_prefix"}, "/randomness");
        read_field(t, "triples", c.randomness.triples, "/randomness");
        read_field(t, "keys", c.randomness.keys, "/randomness");
        read_field(t, "out_prefix", c.randomness.out_prefix, "/randomness");
    }

    if (c.link != "6g" && c.link != "4g") fail("/link", "must be '6g' or '4g'");
    return c;
}

// Byte offset -> 1-based line for parse diagnostics.
std::size_t line_of_offset(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + origin + ":" + std::to_string(line_of_offset(text, e.byte)) +
                          ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: " + origin + ": top level must be an object");
    return parse_json(j);
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string config_to_json(const ExperimentConfig& c) {
    json j{
        {"seed", c.seed},
        {"ring", {{"k", c.ring.ring_bits}, {"f", c.ring.frac_bits}}},
        {"link", c.link},
        {"compute_ops_per_s", c.compute_ops_per_s},
        {"train",
         {{"hospitals", c.train.hospitals},
          {"rounds", c.train.rounds},
          {"local_epochs", c.train.local_epochs},
          {"lr", c.train.lr},
          {"batch_size", c.train.batch_size},
          {"plain_aggregation", c.train.plain_aggregation},
          {"dataset",
           {{"type", c.train.dataset.type},
            {"classes", c.train.dataset.classes},
            {"per_class", c.train.dataset.per_class},
            {"noise", c.train.dataset.noise},
            {"root", c.train.dataset.root}}},
          {"out_dir", c.train.out_dir}}},
        {"infer",
         {{"model", c.infer.model},
          {"batch_sizes", c.infer.batch_sizes},
          {"test_samples", c.infer.test_samples},
          {"dataset",
           {{"type", c.infer.dataset.type},
            {"classes", c.infer.dataset.classes},
            {"per_class", c.infer.dataset.per_class},
            {"noise", c.infer.dataset.noise},
            {"root", c.infer.dataset.root}}},
          {"out_dir", c.infer.out_dir}}},
        {"randomness",
         {{"triples", c.randomness.triples},
          {"keys", c.randomness.keys},
          {"out_prefix", c.randomness.out_prefix}}},
    };
    return j.dump(2) + "\n";
}

} // namespace smpcfl
