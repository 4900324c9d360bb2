#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <functional>
#include <span>

#include "smpcfl/audit.hpp"
#include "smpcfl/dataset.hpp"
#include "smpcfl/secure_nn.hpp"
#include "smpcfl/stats.hpp"

using namespace smpcfl;

namespace {

const FixedPointConfig k64{64, 16};
const double kLsb = std::ldexp(1.0, -16);

struct LayerRun {
    std::vector<RingElement> values;
    Transcript transcript;
};

// Runs one secure layer on an encrypted input and reconstructs the output.
LayerRun run_secure_layer(const ModelParams& model, const std::vector<double>& image,
                          const TensorShape& in, std::uint64_t seed) {
    Rng rng(seed);
    auto [m0, m1] = encrypt_model(model, k64, rng);
    auto [x0, x1] = encrypt_input(image, in, k64, rng);
    const InferenceCost cost = count_inference_cost(model, in);
    auto [p0, p1] = gen_pools(cost.triples, cost.keys, rng, k64);

    std::array<SecretTensor, 2> outs;
    std::array<RandomnessPool, 2> pools{std::move(p0), std::move(p1)};
    std::array<const SharedModel*, 2> models{&m0, &m1};
    std::array<const SecretTensor*, 2> inputs{&x0, &x1};
    auto program = [&](int party) {
        return [&, party](PartyCtx& ctx) {
            MpcSession sess(ctx, 1 - party, std::move(pools[party]));
            sess.set_cfg(k64);
            SecretTensor x = *inputs[party];
            for (const SharedLayer& l : models[party]->layers) {
                switch (l.spec.kind) {
                case LayerKind::Conv2d: x = secure_conv2d(sess, x, l); break;
                case LayerKind::ReLU: x = secure_relu_layer(sess, x); break;
                case LayerKind::MaxPool2: x = secure_maxpool2(sess, x); break;
                case LayerKind::AvgPool2: x = secure_avgpool2(sess, x); break;
                case LayerKind::Flatten: x = secure_flatten(x); break;
                case LayerKind::Dense: x = secure_dense(sess, x, l); break;
                }
            }
            outs[party] = std::move(x);
        };
    };
    LayerRun r;
    r.transcript = run_parties({program(0), program(1)}, link_preset("6g"), seed);
    const ShareVector arr[2] = {outs[0].shares, outs[1].shares};
    r.values = reconstruct(std::span<const ShareVector>(arr, 2));
    return r;
}

ModelParams dense_only(std::vector<double> w, std::vector<double> b, int in, int out) {
    ModelParams m;
    Layer l;
    l.spec = {LayerKind::Dense, {static_cast<std::uint32_t>(in), static_cast<std::uint32_t>(out)}};
    l.weights = std::move(w);
    l.bias = std::move(b);
    m.layers.push_back(std::move(l));
    return m;
}

// Small trained model over the blob data, used by the inference tests.
ModelParams trained_blob_model(int classes, Dataset& train_out, std::uint64_t seed) {
    train_out = make_blob_dataset(classes, 48, 0.03, seed);
    Rng rng(derive_seed(seed, "init"));
    ModelParams m = make_reference_model(classes, rng);
    Rng train_rng(derive_seed(seed, "sgd"));
    for (int e = 0; e < 4; ++e)
        train_epoch(m, train_out.images, train_out.labels, train_out.shape, 0.1, 16, train_rng);
    return m;
}

} // namespace

TEST_CASE("encrypt/decrypt model round-trip: max |delta| <= 2^-17") {
    Rng rng(81);
    ModelParams m = make_reference_model(2, rng);
    auto [p0, p1] = encrypt_model(m, k64, rng);
    const ModelParams back = decrypt_model(p0, p1);
    double max_err = 0;
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        for (std::size_t i = 0; i < m.layers[li].weights.size(); ++i)
            max_err = std::max(max_err,
                               std::abs(m.layers[li].weights[i] - back.layers[li].weights[i]));
        for (std::size_t i = 0; i < m.layers[li].bias.size(); ++i)
            max_err = std::max(max_err, std::abs(m.layers[li].bias[i] - back.layers[li].bias[i]));
    }
    CHECK(max_err <= std::ldexp(1.0, -17));
}

TEST_CASE("zero model encrypts to shares reconstructing to zero") {
    Rng rng(82);
    ModelParams m = dense_only(std::vector<double>(4, 0.0), std::vector<double>(2, 0.0), 2, 2);
    auto [p0, p1] = encrypt_model(m, k64, rng);
    const ModelParams back = decrypt_model(p0, p1);
    for (double w : back.layers[0].weights) CHECK(w == 0.0);
    for (double b : back.layers[0].bias) CHECK(b == 0.0);
}

TEST_CASE("a single party's weight shares look uniform (chi-square)") {
    Rng rng(83);
    ModelParams m = make_reference_model(2, rng);
    std::vector<std::uint64_t> counts(256, 0);
    for (int rep = 0; rep < 4; ++rep) {
        auto [p0, p1] = encrypt_model(m, k64, rng);
        for (const auto& l : p0.layers)
            for (const auto v : l.weights.values) ++counts[v.v >> 56];
    }
    CHECK(uniformity_not_rejected(counts));
}

TEST_CASE("secure_dense: identity matrix passes values through") {
    const ModelParams m = dense_only({1.0, 0.0, 0.0, 1.0}, {0.0, 0.0}, 2, 2);
    const auto r = run_secure_layer(m, {1.5, -2.0}, {1, 1, 2}, 831);
    CHECK(std::abs(decode_fixed(r.values[0], k64) - 1.5) <= 2 * kLsb);
    CHECK(std::abs(decode_fixed(r.values[1], k64) + 2.0) <= 2 * kLsb);
}

TEST_CASE("secure_dense: W=0 leaves only the bias") {
    const ModelParams m = dense_only(std::vector<double>(6, 0.0), {0.25, -1.5}, 3, 2);
    const auto r = run_secure_layer(m, {0.9, -0.4, 0.1}, {1, 1, 3}, 832);
    CHECK(std::abs(decode_fixed(r.values[0], k64) - 0.25) <= 2 * kLsb);
    CHECK(std::abs(decode_fixed(r.values[1], k64) + 1.5) <= 2 * kLsb);
}

TEST_CASE("secure_dense: random 16x8 layer within (fan-in + 1) LSB of float oracle") {
    Rng rng(84);
    ModelParams m;
    Layer l;
    l.spec = {LayerKind::Dense, {16, 8}};
    for (int i = 0; i < 16 * 8; ++i) l.weights.push_back(rng.uniform(-1.0, 1.0));
    for (int i = 0; i < 8; ++i) l.bias.push_back(rng.uniform(-0.5, 0.5));
    m.layers.push_back(std::move(l));
    std::vector<double> x(16);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);

    const auto r = run_secure_layer(m, x, {1, 1, 16}, 841);
    const auto want = forward_float(m, x, {1, 1, 16});
    const double tol = 16 * kLsb + std::ldexp(1.0, -13); // fan-in LSBs + encode slack
    for (int o = 0; o < 8; ++o)
        CHECK(std::abs(decode_fixed(r.values[o], k64) - want[o]) <= tol);
    // Communication: exactly 2 opened elements per product.
    CHECK(r.transcript.total_bytes() == 4ull * 16 * 8 * k64.elem_bytes());
}

TEST_CASE("secure_conv2d: 1x1 identity kernel reproduces the input") {
    ModelParams m;
    Layer l;
    l.spec = {LayerKind::Conv2d, {1, 1, 1}};
    l.weights = {1.0};
    l.bias = {0.0};
    m.layers.push_back(std::move(l));
    const std::vector<double> img = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    const auto r = run_secure_layer(m, img, {3, 3, 1}, 851);
    for (int i = 0; i < 9; ++i)
        CHECK(std::abs(decode_fixed(r.values[i], k64) - img[i]) <= 2 * kLsb);
}

TEST_CASE("secure_conv2d: all-zero kernel maps to zero") {
    ModelParams m;
    Layer l;
    l.spec = {LayerKind::Conv2d, {1, 2, 3}};
    l.weights.assign(2 * 9, 0.0);
    l.bias.assign(2, 0.0);
    m.layers.push_back(std::move(l));
    std::vector<double> img(64, 0.7);
    const auto r = run_secure_layer(m, img, {8, 8, 1}, 852);
    for (const auto v : r.values) CHECK(std::abs(decode_fixed(v, k64)) <= kLsb);
}

TEST_CASE("secure_conv2d: 8x8 input, 3x3 kernel within 9 LSB + encode error of float") {
    Rng rng(85);
    ModelParams m;
    Layer l;
    l.spec = {LayerKind::Conv2d, {1, 4, 3}};
    for (int i = 0; i < 4 * 9; ++i) l.weights.push_back(rng.uniform(-0.8, 0.8));
    for (int i = 0; i < 4; ++i) l.bias.push_back(rng.uniform(-0.3, 0.3));
    m.layers.push_back(std::move(l));
    std::vector<double> img(64);
    for (auto& v : img) v = rng.uniform(-1.0, 1.0);

    const auto r = run_secure_layer(m, img, {8, 8, 1}, 853);
    const auto want = forward_float(m, img, {8, 8, 1});
    const double tol = 9 * kLsb + std::ldexp(1.0, -13);
    for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(std::abs(decode_fixed(r.values[i], k64) - want[i]) <= tol);
}

TEST_CASE("secure_maxpool2: window (1, 5, 3, 2) picks 5") {
    ModelParams m;
    m.layers.push_back(Layer{{LayerKind::MaxPool2, {}}, {}, {}});
    const auto r = run_secure_layer(m, {1.0, 5.0, 3.0, 2.0}, {2, 2, 1}, 861);
    CHECK(decode_fixed(r.values[0], k64) == 5.0);
}

TEST_CASE("secure_maxpool2: constant tensor unchanged, dims halved") {
    ModelParams m;
    m.layers.push_back(Layer{{LayerKind::MaxPool2, {}}, {}, {}});
    std::vector<double> img(16, 0.5);
    const auto r = run_secure_layer(m, img, {4, 4, 1}, 862);
    REQUIRE(r.values.size() == 4);
    for (const auto v : r.values) CHECK(decode_fixed(v, k64) == 0.5);
}

TEST_CASE("secure_maxpool2: random 8x8 matches plaintext fixed-point pool exactly, 100 trials") {
    Rng rng(86);
    ModelParams m;
    m.layers.push_back(Layer{{LayerKind::MaxPool2, {}}, {}, {}});
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> img(64);
        for (auto& v : img) v = rng.uniform(-2.0, 2.0);
        const auto r = run_secure_layer(m, img, {8, 8, 1}, 8600 + trial);
        const auto want = forward_fixed(m, img, {8, 8, 1}, k64);
        REQUIRE(r.values.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(r.values[i] == want[i]);
    }
}

TEST_CASE("secure_avgpool2 averages each window") {
    ModelParams m;
    m.layers.push_back(Layer{{LayerKind::AvgPool2, {}}, {}, {}});
    const auto r = run_secure_layer(m, {1.0, 2.0, 3.0, 6.0}, {2, 2, 1}, 871);
    CHECK(std::abs(decode_fixed(r.values[0], k64) - 3.0) <= 2 * kLsb);
}

TEST_CASE("insufficient triples raise a setup error naming the required count") {
    Rng rng(88);
    const ModelParams m = dense_only({1.0, 0.0, 0.0, 1.0}, {0.0, 0.0}, 2, 2);
    auto [m0, m1] = encrypt_model(m, k64, rng);
    auto [x0, x1] = encrypt_input({1.0, 2.0}, {1, 1, 2}, k64, rng);
    auto [p0, p1] = gen_pools(1, 0, rng, k64); // needs 4
    std::array<RandomnessPool, 2> pools{std::move(p0), std::move(p1)};
    std::array<const SharedModel*, 2> models{&m0, &m1};
    std::array<const SecretTensor*, 2> inputs{&x0, &x1};
    std::array<std::string, 2> errors;
    auto program = [&](int party) {
        return [&, party](PartyCtx& ctx) {
            MpcSession sess(ctx, 1 - party, std::move(pools[party]));
            sess.set_cfg(k64);
            try {
                (void)secure_dense(sess, *inputs[party], models[party]->layers[0]);
            } catch (const SetupError& e) {
                errors[party] = e.what();
            }
        };
    };
    run_parties({program(0), program(1)}, link_preset("6g"), 881);
    CHECK(errors[0].find("need 4 triples") != std::string::npos);
    CHECK(errors[1].find("need 4 triples") != std::string::npos);
}

TEST_CASE("cost query matches actual consumption exactly") {
    Dataset data;
    const ModelParams m = trained_blob_model(2, data, 889);
    const InferenceCost cost = count_inference_cost(m, {16, 16, 1});
    // Pools sized exactly by the query must drain to zero, not under or over.
    Rng rng(890);
    auto [m0, m1] = encrypt_model(m, k64, rng);
    auto [x0, x1] = encrypt_input(data.images[0], {16, 16, 1}, k64, rng);
    auto [p0, p1] = gen_pools(cost.triples, cost.keys, rng, k64);
    std::array<RandomnessPool, 2> pools{std::move(p0), std::move(p1)};
    std::array<const SharedModel*, 2> models{&m0, &m1};
    std::array<const SecretTensor*, 2> inputs{&x0, &x1};
    std::array<std::size_t, 2> triples_left{1, 1}, keys_left{1, 1};
    auto program = [&](int party) {
        return [&, party](PartyCtx& ctx) {
            MpcSession sess(ctx, 1 - party, std::move(pools[party]));
            sess.set_cfg(k64);
            (void)encrypted_inference(sess, *models[party], *inputs[party]);
            triples_left[party] = sess.pool().triples_left();
            keys_left[party] = sess.pool().keys_left();
        };
    };
    run_parties({program(0), program(1)}, link_preset("6g"), 891);
    CHECK(triples_left[0] == 0);
    CHECK(triples_left[1] == 0);
    CHECK(keys_left[0] == 0);
    CHECK(keys_left[1] == 0);
}

TEST_CASE("encrypted inference matches the fixed-point twin on gap-gated samples") {
    Dataset data;
    const ModelParams m = trained_blob_model(2, data, 892);
    const double budget = secure_vs_fixed_budget_lsb(m, {16, 16, 1}, k64) * kLsb;

    std::vector<std::vector<double>> images(data.images.begin(), data.images.begin() + 20);
    const auto run =
        run_encrypted_inference(m, images, {16, 16, 1}, k64, 893, link_preset("6g"));
    CHECK(audit_transcript(run.transcript).ok);

    int gated = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto fixed_logits = forward_fixed(m, images[i], {16, 16, 1}, k64);
        const int want = argmax_fixed(fixed_logits, k64);
        std::vector<double> dec;
        for (const auto v : fixed_logits) dec.push_back(decode_fixed(v, k64));
        std::sort(dec.rbegin(), dec.rend());
        if (dec[0] - dec[1] > budget) {
            ++gated;
            CHECK(run.predictions[i] == want);
        }
    }
    CHECK(gated > 10); // the gate must actually exercise most samples
}

TEST_CASE("constant logits break ties to index 0") {
    Rng rng(89);
    const ModelParams m = dense_only(std::vector<double>(8, 0.0), std::vector<double>(4, 0.25), 2, 4);
    const auto run = run_encrypted_inference(m, {{0.5, -0.5}}, {1, 1, 2}, k64, 894,
                                             link_preset("6g"));
    CHECK(run.predictions[0] == 0);
}

TEST_CASE("batch of 5 and batch of 10 give identical per-sample predictions") {
    Dataset data;
    const ModelParams m = trained_blob_model(2, data, 895);
    std::vector<std::vector<double>> ten(data.images.begin(), data.images.begin() + 10);
    std::vector<std::vector<double>> five(data.images.begin(), data.images.begin() + 5);
    const auto run10 = run_encrypted_inference(m, ten, {16, 16, 1}, k64, 896, link_preset("6g"));
    const auto run5 = run_encrypted_inference(m, five, {16, 16, 1}, k64, 896, link_preset("6g"));
    for (int i = 0; i < 5; ++i) CHECK(run5.predictions[i] == run10.predictions[i]);
}

TEST_CASE("per-layer error budget holds against the fixed-point twin") {
    // Prefix stacks of the reference architecture, layer by layer.
    Dataset data;
    const ModelParams full = trained_blob_model(2, data, 897);
    for (std::size_t depth = 1; depth <= full.layers.size(); ++depth) {
        ModelParams prefix;
        prefix.layers.assign(full.layers.begin(), full.layers.begin() + depth);
        const double budget = secure_vs_fixed_budget_lsb(prefix, {16, 16, 1}, k64) * kLsb;
        const auto secure_prefix =
            run_secure_layer(prefix, data.images[1], {16, 16, 1}, 899 + depth);
        const auto fixed = forward_fixed(prefix, data.images[1], {16, 16, 1}, k64);
        REQUIRE(secure_prefix.values.size() == fixed.size());
        double worst = 0;
        for (std::size_t i = 0; i < fixed.size(); ++i) {
            const double d = std::abs(decode_fixed(secure_prefix.values[i], k64) -
                                      decode_fixed(fixed[i], k64));
            worst = std::max(worst, d);
        }
        CHECK(worst <= budget);
    }
}

TEST_CASE("model files: bit-exact round-trip for plain and shared modes") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "smpcfl_test_models";
    fs::create_directories(dir);
    Rng rng(91);
    const ModelParams m = make_reference_model(3, rng);

    const std::string plain_path = (dir / "m.model").string();
    write_model_file(plain_path, m, k64);
    FixedPointConfig cfg_back;
    const ModelParams back = read_model_file(plain_path, cfg_back);
    CHECK(cfg_back == k64);
    REQUIRE(back.layers.size() == m.layers.size());
    // Rewriting the decoded model reproduces the file byte-for-byte.
    const std::string plain2 = (dir / "m2.model").string();
    write_model_file(plain2, back, k64);
    std::ifstream f1(plain_path, std::ios::binary), f2(plain2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);

    auto [p0, p1] = encrypt_model(m, k64, rng);
    const std::string s0 = (dir / "m.p0.model").string();
    const std::string s1 = (dir / "m.p1.model").string();
    write_shared_model_file(s0, p0);
    write_shared_model_file(s1, p1);
    const SharedModel r0 = read_shared_model_file(s0);
    const SharedModel r1 = read_shared_model_file(s1);
    CHECK(r0.party == 0);
    CHECK(r1.party == 1);
    const ModelParams dec = decrypt_model(r0, r1);
    for (std::size_t li = 0; li < m.layers.size(); ++li)
        for (std::size_t i = 0; i < m.layers[li].weights.size(); ++i)
            CHECK(std::abs(dec.layers[li].weights[i] - m.layers[li].weights[i]) <=
                  std::ldexp(1.0, -17));

    CHECK_THROWS_AS(read_model_file(s0, cfg_back), ConfigError); // mode mismatch
    CHECK_THROWS_AS(read_shared_model_file(plain_path), ConfigError);
    CHECK_THROWS_AS(read_model_file((dir / "missing.model").string(), cfg_back), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("shape errors are rejected up front") {
    ModelParams m;
    Layer l;
    l.spec = {LayerKind::Dense, {4, 2}};
    l.weights.assign(8, 0.1);
    l.bias.assign(2, 0.0);
    m.layers.push_back(std::move(l));
    CHECK_THROWS_AS(check_model_shapes(m, {1, 1, 3}), ConfigError);
    ModelParams pool;
    pool.layers.push_back(Layer{{LayerKind::MaxPool2, {}}, {}, {}});
    CHECK_THROWS_AS(check_model_shapes(pool, {3, 3, 1}), ConfigError);
}
