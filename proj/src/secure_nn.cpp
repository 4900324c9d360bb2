#include "smpcfl/secure_nn.hpp"

#include <string>

#include "smpcfl/errors.hpp"

namespace smpcfl {

namespace {

std::uint32_t conv_in_c(const LayerSpec& s) { return s.dims.at(0); }
std::uint32_t conv_out_c(const LayerSpec& s) { return s.dims.at(1); }
std::uint32_t conv_k(const LayerSpec& s) { return s.dims.at(2); }
std::uint32_t dense_in(const LayerSpec& s) { return s.dims.at(0); }
std::uint32_t dense_out(const LayerSpec& s) { return s.dims.at(1); }

ShareVector gather(const ShareVector& src, const std::vector<std::size_t>& idx) {
    ShareVector out = src;
    out.values.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out.values[i] = src.values[idx[i]];
    return out;
}

// Sum of products with 2f fractional bits, bias lifted by 2^f, one truncation
// per output. Mirrors forward_fixed exactly up to the probabilistic LSB.
ShareVector contract(MpcSession& s, const ShareVector& lhs, const ShareVector& rhs,
                     std::size_t n_out, std::size_t fan_in, const ShareVector& bias) {
    const FixedPointConfig& cfg = lhs.cfg;
    const ShareVector prod = beaver_mul_pooled(s, lhs, rhs);
    const RingElement lift{std::uint64_t{1} << cfg.frac_bits};
    std::vector<RingElement> acc(n_out);
    for (std::size_t o = 0; o < n_out; ++o) {
        RingElement sum = ring_mul(bias.values[o], lift, cfg);
        for (std::size_t i = 0; i < fan_in; ++i)
            sum = ring_add(sum, prod.values[o * fan_in + i], cfg);
        acc[o] = sum;
    }
    return truncate(make_2pc_share(lhs.party, cfg, std::move(acc)));
}

} // namespace

std::pair<SecretTensor, SecretTensor> encrypt_input(const std::vector<double>& image,
                                                    const TensorShape& shape,
                                                    const FixedPointConfig& cfg, Rng& rng) {
    if (image.size() != shape.count()) throw ConfigError("encrypt_input: shape/size mismatch");
    std::vector<RingElement> enc(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) enc[i] = encode_fixed(image[i], cfg);
    auto sh = share(enc, 2, rng, cfg);
    return {SecretTensor{shape, std::move(sh[0])}, SecretTensor{shape, std::move(sh[1])}};
}

InferenceCost count_inference_cost(const std::vector<LayerSpec>& specs, const TensorShape& in,
                                   int num_classes) {
    InferenceCost cost;
    TensorShape s = in;
    for (const LayerSpec& spec : specs) {
        const TensorShape out = layer_output_shape(spec, s);
        switch (spec.kind) {
        case LayerKind::Conv2d:
            cost.triples += out.count() * conv_in_c(spec) * conv_k(spec) * conv_k(spec);
            break;
        case LayerKind::Dense:
            cost.triples += std::size_t{dense_in(spec)} * dense_out(spec);
            break;
        case LayerKind::ReLU:
            cost.keys += s.count();
            cost.triples += s.count();
            break;
        case LayerKind::MaxPool2:
            cost.keys += 3 * out.count();
            cost.triples += 3 * out.count();
            break;
        case LayerKind::AvgPool2:
        case LayerKind::Flatten:
            break;
        }
        s = out;
    }
    // Tournament argmax: one comparison and two selects per contender.
    cost.keys += static_cast<std::size_t>(num_classes - 1);
    cost.triples += 2 * static_cast<std::size_t>(num_classes - 1);
    return cost;
}

InferenceCost count_inference_cost(const ModelParams& m, const TensorShape& in) {
    std::vector<LayerSpec> specs;
    for (const auto& l : m.layers) specs.push_back(l.spec);
    const TensorShape out = model_output_shape(m, in);
    return count_inference_cost(specs, in, static_cast<int>(out.count()));
}

SecretTensor secure_dense(MpcSession& s, const SecretTensor& x, const SharedLayer& layer) {
    const std::uint32_t in_n = dense_in(layer.spec), out_n = dense_out(layer.spec);
    if (x.shape.count() != in_n) throw ProtocolError("secure_dense: fan-in mismatch");
    const std::size_t need = std::size_t{in_n} * out_n;
    if (s.pool().triples_left() < need)
        throw SetupError("secure_dense: need " + std::to_string(need) + " triples, pool has " +
                         std::to_string(s.pool().triples_left()));
    // Expand to elementwise product vectors: X repeated per output row.
    std::vector<std::size_t> xi(need);
    for (std::uint32_t o = 0; o < out_n; ++o)
        for (std::uint32_t i = 0; i < in_n; ++i) xi[std::size_t{o} * in_n + i] = i;
    const ShareVector lhs = gather(x.shares, xi);
    ShareVector out = contract(s, lhs, layer.weights, out_n, in_n, layer.bias);
    return SecretTensor{{1, 1, out_n}, std::move(out)};
}

SecretTensor secure_conv2d(MpcSession& s, const SecretTensor& x, const SharedLayer& layer) {
    const TensorShape out_s = layer_output_shape(layer.spec, x.shape);
    const std::uint32_t k = conv_k(layer.spec), ic = conv_in_c(layer.spec),
                        oc = conv_out_c(layer.spec);
    const TensorShape& in_s = x.shape;
    const std::size_t window = std::size_t{ic} * k * k;
    const std::size_t n_out = out_s.count();
    const std::size_t need = n_out * window;
    if (s.pool().triples_left() < need)
        throw SetupError("secure_conv2d: need " + std::to_string(need) + " triples, pool has " +
                         std::to_string(s.pool().triples_left()));

    // im2col lowering: every output position becomes one dense row.
    std::vector<std::size_t> xi(need), wi(need);
    std::size_t pos = 0;
    for (std::uint32_t i = 0; i < out_s.h; ++i)
        for (std::uint32_t j = 0; j < out_s.w; ++j)
            for (std::uint32_t o = 0; o < oc; ++o)
                for (std::uint32_t c = 0; c < ic; ++c)
                    for (std::uint32_t a = 0; a < k; ++a)
                        for (std::uint32_t b = 0; b < k; ++b) {
                            xi[pos] = ((std::size_t{i} + a) * in_s.w + (j + b)) * in_s.c + c;
                            wi[pos] = ((std::size_t{o} * ic + c) * k + a) * k + b;
                            ++pos;
                        }
    const ShareVector lhs = gather(x.shares, xi);
    const ShareVector rhs = gather(layer.weights, wi);

    // Bias per output position follows the (h, w, oc) layout.
    std::vector<std::size_t> bi(n_out);
    for (std::uint32_t i = 0; i < out_s.h; ++i)
        for (std::uint32_t j = 0; j < out_s.w; ++j)
            for (std::uint32_t o = 0; o < oc; ++o)
                bi[(std::size_t{i} * out_s.w + j) * oc + o] = o;
    const ShareVector bias = gather(layer.bias, bi);

    // Row order of the product vector is (i, j, o), matching bias and output.
    ShareVector out = contract(s, lhs, rhs, n_out, window, bias);
    return SecretTensor{out_s, std::move(out)};
}

SecretTensor secure_relu_layer(MpcSession& s, const SecretTensor& x) {
    return SecretTensor{x.shape, secure_relu(s, x.shares)};
}

SecretTensor secure_maxpool2(MpcSession& s, const SecretTensor& x) {
    const TensorShape out_s = layer_output_shape({LayerKind::MaxPool2, {}}, x.shape);
    const TensorShape& in_s = x.shape;
    const std::size_t n = out_s.count();
    std::vector<std::size_t> i00(n), i01(n), i10(n), i11(n);
    std::size_t pos = 0;
    for (std::uint32_t i = 0; i < out_s.h; ++i)
        for (std::uint32_t j = 0; j < out_s.w; ++j)
            for (std::uint32_t c = 0; c < in_s.c; ++c) {
                i00[pos] = (std::size_t{2 * i} * in_s.w + 2 * j) * in_s.c + c;
                i01[pos] = (std::size_t{2 * i} * in_s.w + 2 * j + 1) * in_s.c + c;
                i10[pos] = (std::size_t{2 * i + 1} * in_s.w + 2 * j) * in_s.c + c;
                i11[pos] = (std::size_t{2 * i + 1} * in_s.w + 2 * j + 1) * in_s.c + c;
                ++pos;
            }
    // Same tournament and tie direction as forward_fixed.
    const ShareVector m1 = secure_max(s, gather(x.shares, i00), gather(x.shares, i01));
    const ShareVector m2 = secure_max(s, gather(x.shares, i10), gather(x.shares, i11));
    ShareVector out = secure_max(s, m1, m2);
    return SecretTensor{out_s, std::move(out)};
}

SecretTensor secure_avgpool2(MpcSession& s, const SecretTensor& x) {
    const TensorShape out_s = layer_output_shape({LayerKind::AvgPool2, {}}, x.shape);
    const TensorShape& in_s = x.shape;
    const FixedPointConfig& cfg = x.shares.cfg;
    std::vector<RingElement> acc(out_s.count());
    std::size_t pos = 0;
    for (std::uint32_t i = 0; i < out_s.h; ++i)
        for (std::uint32_t j = 0; j < out_s.w; ++j)
            for (std::uint32_t c = 0; c < in_s.c; ++c) {
                RingElement sum{0};
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b)
                        sum = ring_add(sum,
                                       x.shares.values[(std::size_t{2 * i + a} * in_s.w +
                                                         (2 * j + b)) * in_s.c + c],
                                       cfg);
                acc[pos++] = sum;
            }
    ShareVector sums = make_2pc_share(x.shares.party, cfg, std::move(acc));
    const RingElement quarter{std::uint64_t{1} << (cfg.frac_bits - 2)};
    ShareVector out = truncate(mul_public(sums, quarter));
    return SecretTensor{out_s, std::move(out)};
}

SecretTensor secure_flatten(const SecretTensor& x) {
    return SecretTensor{{1, 1, static_cast<std::uint32_t>(x.shape.count())}, x.shares};
}

int encrypted_inference(MpcSession& s, const SharedModel& model, const SecretTensor& input) {
    SecretTensor x = input;
    for (const SharedLayer& l : model.layers) {
        switch (l.spec.kind) {
        case LayerKind::Conv2d: x = secure_conv2d(s, x, l); break;
        case LayerKind::ReLU: x = secure_relu_layer(s, x); break;
        case LayerKind::MaxPool2: x = secure_maxpool2(s, x); break;
        case LayerKind::AvgPool2: x = secure_avgpool2(s, x); break;
        case LayerKind::Flatten: x = secure_flatten(x); break;
        case LayerKind::Dense: x = secure_dense(s, x, l); break;
        }
    }
    const std::size_t n_classes = x.shape.count();
    if (n_classes < 1) throw ProtocolError("encrypted_inference: empty logits");
    const FixedPointConfig& cfg = x.shares.cfg;
    const int party = s.party();

    // Tournament argmax; ties keep the lower index, and only the final index
    // share is ever opened.
    ShareVector best = make_2pc_share(party, cfg, {x.shares.values[0]});
    ShareVector best_idx = make_2pc_share(party, cfg, {RingElement{0}});
    for (std::size_t c = 1; c < n_classes; ++c) {
        const ShareVector cand = make_2pc_share(party, cfg, {x.shares.values[c]});
        const ShareVector diff = sub_shares(cand, best);
        const ShareVector leq = compare_leq_zero_pooled(s, diff);
        ShareVector gt = leq;
        for (auto& v : gt.values) v = ring_neg(v, cfg);
        const RingElement one[1] = {RingElement{1}};
        gt = add_public(gt, one);

        best = add_shares(best, beaver_mul_pooled(s, diff, gt));
        ShareVector idx_diff = best_idx;
        for (auto& v : idx_diff.values) v = ring_neg(v, cfg);
        const RingElement c_const[1] = {RingElement{static_cast<std::uint64_t>(c)}};
        idx_diff = add_public(idx_diff, c_const);
        best_idx = add_shares(best_idx, beaver_mul_pooled(s, idx_diff, gt));
    }
    const OpenedValue idx = s.open_one(best_idx.values[0], tag::kRevealOutput);
    if (idx.value.v >= n_classes)
        throw ProtocolError("encrypted_inference: revealed index out of range");
    return static_cast<int>(idx.value.v);
}

namespace {

EncryptedInferenceResult run_inference_programs(const SharedModel& m0, const SharedModel& m1,
                                                const std::vector<std::vector<double>>& images,
                                                const TensorShape& in, std::uint64_t seed,
                                                const LinkModel& link, const SimOptions& opts) {
    const FixedPointConfig cfg = m0.cfg;
    std::vector<LayerSpec> specs;
    for (const auto& l : m0.layers) specs.push_back(l.spec);
    TensorShape out_shape = in;
    for (const auto& sp : specs) out_shape = layer_output_shape(sp, out_shape);
    const int n_classes = static_cast<int>(out_shape.count());
    const InferenceCost cost = count_inference_cost(specs, in, n_classes);

    // Offline phase: per-image pools and input shares, keyed by the global
    // image index so predictions are batch-size invariant.
    const std::size_t n = images.size();
    std::vector<RandomnessPool> pool0, pool1;
    std::vector<SecretTensor> in0, in1;
    pool0.reserve(n);
    pool1.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng dealer_rng(derive_seed(seed, "dealer", i));
        auto [p0, p1] = gen_pools(cost.triples, cost.keys, dealer_rng, cfg);
        pool0.push_back(std::move(p0));
        pool1.push_back(std::move(p1));
        Rng input_rng(derive_seed(seed, "input", i));
        auto [t0, t1] = encrypt_input(images[i], in, cfg, input_rng);
        in0.push_back(std::move(t0));
        in1.push_back(std::move(t1));
    }

    std::vector<int> pred0(n, -1), pred1(n, -1);
    auto program = [&](int party) {
        return [&, party](PartyCtx& ctx) {
            for (std::size_t i = 0; i < n; ++i) {
                ctx.set_session(static_cast<std::uint32_t>(i));
                MpcSession sess(ctx, 1 - party,
                                std::move(party == 0 ? pool0[i] : pool1[i]));
                sess.set_cfg(cfg);
                const SecretTensor& input = party == 0 ? in0[i] : in1[i];
                const int p = encrypted_inference(sess, party == 0 ? m0 : m1, input);
                (party == 0 ? pred0 : pred1)[i] = p;
            }
        };
    };
    Transcript t = run_parties({program(0), program(1)}, link, seed, opts);
    if (pred0 != pred1) throw ProtocolError("parties disagree on revealed predictions");
    return EncryptedInferenceResult{std::move(pred0), std::move(t)};
}

} // namespace

EncryptedInferenceResult run_encrypted_inference(const ModelParams& model,
                                                 const std::vector<std::vector<double>>& images,
                                                 const TensorShape& in,
                                                 const FixedPointConfig& cfg, std::uint64_t seed,
                                                 const LinkModel& link, const SimOptions& opts) {
    Rng model_rng(derive_seed(seed, "model-share"));
    auto [m0, m1] = encrypt_model(model, cfg, model_rng);
    return run_inference_programs(m0, m1, images, in, seed, link, opts);
}

EncryptedInferenceResult run_encrypted_inference_shared(
    const SharedModel& m0, const SharedModel& m1,
    const std::vector<std::vector<double>>& images, const TensorShape& in, std::uint64_t seed,
    const LinkModel& link, const SimOptions& opts) {
    if (!(m0.cfg == m1.cfg) || m0.party == m1.party)
        throw ConfigError("shared model halves do not match");
    return run_inference_programs(m0, m1, images, in, seed, link, opts);
}

} // namespace smpcfl
