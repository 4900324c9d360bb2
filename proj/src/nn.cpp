#include "smpcfl/nn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "smpcfl/errors.hpp"

namespace smpcfl {

namespace {

std::uint32_t conv_in_c(const LayerSpec& s) { return s.dims.at(0); }
std::uint32_t conv_out_c(const LayerSpec& s) { return s.dims.at(1); }
std::uint32_t conv_k(const LayerSpec& s) { return s.dims.at(2); }
std::uint32_t dense_in(const LayerSpec& s) { return s.dims.at(0); }
std::uint32_t dense_out(const LayerSpec& s) { return s.dims.at(1); }

} // namespace

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    return n;
}

TensorShape layer_output_shape(const LayerSpec& spec, const TensorShape& in) {
    switch (spec.kind) {
    case LayerKind::Conv2d: {
        if (in.c != conv_in_c(spec))
            throw ConfigError("conv2d: input has " + std::to_string(in.c) + " channels, kernel expects " +
                              std::to_string(conv_in_c(spec)));
        const std::uint32_t k = conv_k(spec);
        if (in.h < k || in.w < k) throw ConfigError("conv2d: input smaller than kernel");
        return {in.h - k + 1, in.w - k + 1, conv_out_c(spec)};
    }
    case LayerKind::ReLU:
        return in;
    case LayerKind::MaxPool2:
    case LayerKind::AvgPool2:
        if (in.h % 2 != 0 || in.w % 2 != 0)
            throw ConfigError("pool2: spatial dims must be even, got " + std::to_string(in.h) + "x" +
                              std::to_string(in.w));
        return {in.h / 2, in.w / 2, in.c};
    case LayerKind::Flatten:
        return {1, 1, static_cast<std::uint32_t>(in.count())};
    case LayerKind::Dense:
        if (in.count() != dense_in(spec))
            throw ConfigError("dense: fan-in " + std::to_string(dense_in(spec)) + " does not match input " +
                              std::to_string(in.count()));
        return {1, 1, dense_out(spec)};
    }
    throw ConfigError("unknown layer kind");
}

TensorShape model_output_shape(const ModelParams& m, const TensorShape& in) {
    TensorShape s = in;
    for (const auto& l : m.layers) s = layer_output_shape(l.spec, s);
    return s;
}

void check_model_shapes(const ModelParams& m, const TensorShape& in) {
    (void)model_output_shape(m, in);
}

ModelParams make_reference_model(int num_classes, Rng& rng) {
    if (num_classes < 2) throw ConfigError("reference model needs at least 2 classes");
    auto he_init = [&rng](std::size_t fan_in) {
        return rng.normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    };
    ModelParams m;

    Layer conv;
    conv.spec = {LayerKind::Conv2d, {1, 8, 3}};
    conv.weights.resize(8 * 1 * 3 * 3);
    conv.bias.assign(8, 0.0);
    for (auto& w : conv.weights) w = he_init(9);
    m.layers.push_back(std::move(conv));

    m.layers.push_back(Layer{{LayerKind::ReLU, {}}, {}, {}});
    m.layers.push_back(Layer{{LayerKind::MaxPool2, {}}, {}, {}});
    m.layers.push_back(Layer{{LayerKind::Flatten, {}}, {}, {}});

    Layer fc1;
    fc1.spec = {LayerKind::Dense, {7 * 7 * 8, 32}};
    fc1.weights.resize(32 * 7 * 7 * 8);
    fc1.bias.assign(32, 0.0);
    for (auto& w : fc1.weights) w = he_init(7 * 7 * 8);
    m.layers.push_back(std::move(fc1));

    m.layers.push_back(Layer{{LayerKind::ReLU, {}}, {}, {}});

    Layer fc2;
    fc2.spec = {LayerKind::Dense, {32, static_cast<std::uint32_t>(num_classes)}};
    fc2.weights.resize(static_cast<std::size_t>(num_classes) * 32);
    fc2.bias.assign(num_classes, 0.0);
    for (auto& w : fc2.weights) w = he_init(32);
    m.layers.push_back(std::move(fc2));

    check_model_shapes(m, {16, 16, 1});
    return m;
}

namespace {

// ---- float forward/backward ----------------------------------------------

struct FloatTape {
    std::vector<std::vector<double>> inputs;   // input of each layer
    std::vector<TensorShape> shapes;           // shape of each layer input
    std::vector<std::vector<int>> pool_argmax; // per maxpool layer, chosen offset
};

std::vector<double> forward_float_impl(const ModelParams& m, std::vector<double> x,
                                       TensorShape s, FloatTape* tape) {
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        const Layer& l = m.layers[li];
        if (tape) {
            tape->inputs.push_back(x);
            tape->shapes.push_back(s);
        }
        const TensorShape out_s = layer_output_shape(l.spec, s);
        std::vector<double> y(out_s.count(), 0.0);
        switch (l.spec.kind) {
        case LayerKind::Conv2d: {
            const std::uint32_t k = conv_k(l.spec), ic = conv_in_c(l.spec), oc = conv_out_c(l.spec);
            for (std::uint32_t o = 0; o < oc; ++o)
                for (std::uint32_t i = 0; i < out_s.h; ++i)
                    for (std::uint32_t j = 0; j < out_s.w; ++j) {
                        double acc = l.bias[o];
                        for (std::uint32_t c = 0; c < ic; ++c)
                            for (std::uint32_t a = 0; a < k; ++a)
                                for (std::uint32_t b = 0; b < k; ++b)
                                    acc += x[((i + a) * s.w + (j + b)) * s.c + c] *
                                           l.weights[((o * ic + c) * k + a) * k + b];
                        y[(i * out_s.w + j) * oc + o] = acc;
                    }
            break;
        }
        case LayerKind::ReLU:
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::max(0.0, x[i]);
            break;
        case LayerKind::MaxPool2: {
            std::vector<int> arg(out_s.count(), 0);
            for (std::uint32_t i = 0; i < out_s.h; ++i)
                for (std::uint32_t j = 0; j < out_s.w; ++j)
                    for (std::uint32_t c = 0; c < s.c; ++c) {
                        double best = -1e300;
                        int best_off = 0;
                        for (int a = 0; a < 2; ++a)
                            for (int b = 0; b < 2; ++b) {
                                const double v = x[((2 * i + a) * s.w + (2 * j + b)) * s.c + c];
                                if (v > best) {
                                    best = v;
                                    best_off = a * 2 + b;
                                }
                            }
                        y[(i * out_s.w + j) * s.c + c] = best;
                        arg[(i * out_s.w + j) * s.c + c] = best_off;
                    }
            if (tape) tape->pool_argmax.push_back(std::move(arg));
            break;
        }
        case LayerKind::AvgPool2:
            for (std::uint32_t i = 0; i < out_s.h; ++i)
                for (std::uint32_t j = 0; j < out_s.w; ++j)
                    for (std::uint32_t c = 0; c < s.c; ++c) {
                        double acc = 0;
                        for (int a = 0; a < 2; ++a)
                            for (int b = 0; b < 2; ++b)
                                acc += x[((2 * i + a) * s.w + (2 * j + b)) * s.c + c];
                        y[(i * out_s.w + j) * s.c + c] = acc / 4.0;
                    }
            break;
        case LayerKind::Flatten:
            y = x;
            break;
        case LayerKind::Dense: {
            const std::uint32_t in = dense_in(l.spec), out = dense_out(l.spec);
            for (std::uint32_t o = 0; o < out; ++o) {
                double acc = l.bias[o];
                for (std::uint32_t i = 0; i < in; ++i) acc += l.weights[o * in + i] * x[i];
                y[o] = acc;
            }
            break;
        }
        }
        x = std::move(y);
        s = out_s;
    }
    return x;
}

struct Gradients {
    std::vector<std::vector<double>> w, b;

    explicit Gradients(const ModelParams& m) {
        for (const auto& l : m.layers) {
            w.emplace_back(l.weights.size(), 0.0);
            b.emplace_back(l.bias.size(), 0.0);
        }
    }
    void reset() {
        for (auto& g : w) std::fill(g.begin(), g.end(), 0.0);
        for (auto& g : b) std::fill(g.begin(), g.end(), 0.0);
    }
};

void backward_float(const ModelParams& m, const FloatTape& tape, std::vector<double> grad,
                    Gradients& out) {
    std::size_t pool_idx = tape.pool_argmax.size();
    for (std::size_t li = m.layers.size(); li-- > 0;) {
        const Layer& l = m.layers[li];
        const std::vector<double>& x = tape.inputs[li];
        const TensorShape s = tape.shapes[li];
        const TensorShape out_s = layer_output_shape(l.spec, s);
        std::vector<double> gx(x.size(), 0.0);
        switch (l.spec.kind) {
        case LayerKind::Conv2d: {
            const std::uint32_t k = conv_k(l.spec), ic = conv_in_c(l.spec), oc = conv_out_c(l.spec);
            for (std::uint32_t o = 0; o < oc; ++o)
                for (std::uint32_t i = 0; i < out_s.h; ++i)
                    for (std::uint32_t j = 0; j < out_s.w; ++j) {
                        const double g = grad[(i * out_s.w + j) * oc + o];
                        out.b[li][o] += g;
                        for (std::uint32_t c = 0; c < ic; ++c)
                            for (std::uint32_t a = 0; a < k; ++a)
                                for (std::uint32_t b = 0; b < k; ++b) {
                                    const std::size_t xi = ((i + a) * s.w + (j + b)) * s.c + c;
                                    out.w[li][((o * ic + c) * k + a) * k + b] += g * x[xi];
                                    gx[xi] += g * l.weights[((o * ic + c) * k + a) * k + b];
                                }
                    }
            break;
        }
        case LayerKind::ReLU:
            for (std::size_t i = 0; i < x.size(); ++i) gx[i] = x[i] > 0.0 ? grad[i] : 0.0;
            break;
        case LayerKind::MaxPool2: {
            --pool_idx;
            const auto& arg = tape.pool_argmax[pool_idx];
            for (std::uint32_t i = 0; i < out_s.h; ++i)
                for (std::uint32_t j = 0; j < out_s.w; ++j)
                    for (std::uint32_t c = 0; c < s.c; ++c) {
                        const int off = arg[(i * out_s.w + j) * s.c + c];
                        const int a = off / 2, b = off % 2;
                        gx[((2 * i + a) * s.w + (2 * j + b)) * s.c + c] +=
                            grad[(i * out_s.w + j) * s.c + c];
                    }
            break;
        }
        case LayerKind::AvgPool2:
            for (std::uint32_t i = 0; i < out_s.h; ++i)
                for (std::uint32_t j = 0; j < out_s.w; ++j)
                    for (std::uint32_t c = 0; c < s.c; ++c)
                        for (int a = 0; a < 2; ++a)
                            for (int b = 0; b < 2; ++b)
                                gx[((2 * i + a) * s.w + (2 * j + b)) * s.c + c] +=
                                    grad[(i * out_s.w + j) * s.c + c] / 4.0;
            break;
        case LayerKind::Flatten:
            gx = grad;
            break;
        case LayerKind::Dense: {
            const std::uint32_t in = dense_in(l.spec), out_n = dense_out(l.spec);
            for (std::uint32_t o = 0; o < out_n; ++o) {
                const double g = grad[o];
                out.b[li][o] += g;
                for (std::uint32_t i = 0; i < in; ++i) {
                    out.w[li][o * in + i] += g * x[i];
                    gx[i] += g * l.weights[o * in + i];
                }
            }
            break;
        }
        }
        grad = std::move(gx);
    }
}

std::vector<double> softmax(const std::vector<double>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double sum = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - m);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

} // namespace

std::vector<double> forward_float(const ModelParams& m, const std::vector<double>& image,
                                  const TensorShape& in) {
    return forward_float_impl(m, image, in, nullptr);
}

int argmax_float(const std::vector<double>& logits) {
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

int argmax_fixed(const std::vector<RingElement>& logits, const FixedPointConfig& cfg) {
    int best = 0;
    std::int64_t best_v = signed_value(logits[0], cfg);
    for (std::size_t i = 1; i < logits.size(); ++i) {
        const std::int64_t v = signed_value(logits[i], cfg);
        if (v > best_v) {
            best_v = v;
            best = static_cast<int>(i);
        }
    }
    return best;
}

double train_epoch(ModelParams& m, const std::vector<std::vector<double>>& images,
                   const std::vector<int>& labels, const TensorShape& in, double lr,
                   int batch_size, Rng& rng) {
    if (images.empty()) throw ConfigError("train_epoch: empty dataset");
    if (!std::all_of(labels.begin(), labels.end(), [](int l) { return l >= 0; }))
        throw ConfigError("train_epoch: negative label");
    std::vector<std::size_t> order(images.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng.engine());

    Gradients grads(m);
    double total_loss = 0;
    std::size_t done = 0;
    while (done < order.size()) {
        const std::size_t bsz = std::min<std::size_t>(batch_size, order.size() - done);
        grads.reset();
        for (std::size_t bi = 0; bi < bsz; ++bi) {
            const std::size_t idx = order[done + bi];
            FloatTape tape;
            const auto logits = forward_float_impl(m, images[idx], in, &tape);
            auto p = softmax(logits);
            const int y = labels[idx];
            total_loss += -std::log(std::max(p[y], 1e-12));
            p[y] -= 1.0; // d(CE)/d(logits)
            backward_float(m, tape, p, grads);
        }
        for (std::size_t li = 0; li < m.layers.size(); ++li) {
            const double scale = lr / static_cast<double>(bsz);
            for (std::size_t i = 0; i < m.layers[li].weights.size(); ++i)
                m.layers[li].weights[i] -= scale * grads.w[li][i];
            for (std::size_t i = 0; i < m.layers[li].bias.size(); ++i)
                m.layers[li].bias[i] -= scale * grads.b[li][i];
        }
        done += bsz;
    }
    const double mean_loss = total_loss / static_cast<double>(images.size());
    if (!std::isfinite(mean_loss))
        throw ProtocolError("training diverged: non-finite loss");
    return mean_loss;
}

double cross_entropy_loss(const ModelParams& m, const std::vector<std::vector<double>>& images,
                          const std::vector<int>& labels, const TensorShape& in) {
    double total = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto p = softmax(forward_float(m, images[i], in));
        total += -std::log(std::max(p[labels[i]], 1e-12));
    }
    return total / static_cast<double>(images.size());
}

double accuracy(const ModelParams& m, const std::vector<std::vector<double>>& images,
                const std::vector<int>& labels, const TensorShape& in) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < images.size(); ++i)
        if (argmax_float(forward_float(m, images[i], in)) == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(images.size());
}

ModelParams fedavg_plain(const std::vector<ModelParams>& models) {
    if (models.empty()) throw ConfigError("fedavg_plain: no models");
    ModelParams avg = models[0];
    for (std::size_t mi = 1; mi < models.size(); ++mi) {
        const ModelParams& m = models[mi];
        if (m.layers.size() != avg.layers.size()) throw ConfigError("fedavg_plain: layer count mismatch");
        for (std::size_t li = 0; li < avg.layers.size(); ++li) {
            if (m.layers[li].weights.size() != avg.layers[li].weights.size() ||
                m.layers[li].bias.size() != avg.layers[li].bias.size())
                throw ConfigError("fedavg_plain: shape mismatch at layer " + std::to_string(li));
            for (std::size_t i = 0; i < avg.layers[li].weights.size(); ++i)
                avg.layers[li].weights[i] += m.layers[li].weights[i];
            for (std::size_t i = 0; i < avg.layers[li].bias.size(); ++i)
                avg.layers[li].bias[i] += m.layers[li].bias[i];
        }
    }
    const double n = static_cast<double>(models.size());
    for (auto& l : avg.layers) {
        for (auto& w : l.weights) w /= n;
        for (auto& b : l.bias) b /= n;
    }
    return avg;
}

// ---- fixed-point twin ------------------------------------------------------

namespace {

RingElement fixed_trunc(RingElement v, int shift, const FixedPointConfig& cfg) {
    return from_signed(signed_value(v, cfg) >> shift, cfg);
}

} // namespace

std::vector<RingElement> forward_fixed(const ModelParams& m, const std::vector<double>& image,
                                       const TensorShape& in, const FixedPointConfig& cfg) {
    const int f = cfg.frac_bits;
    const RingElement quarter{std::uint64_t{1} << (f - 2)};
    std::vector<RingElement> x(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) x[i] = encode_fixed(image[i], cfg);
    TensorShape s = in;
    for (const Layer& l : m.layers) {
        const TensorShape out_s = layer_output_shape(l.spec, s);
        std::vector<RingElement> y(out_s.count());
        switch (l.spec.kind) {
        case LayerKind::Conv2d: {
            const std::uint32_t k = conv_k(l.spec), ic = conv_in_c(l.spec), oc = conv_out_c(l.spec);
            for (std::uint32_t o = 0; o < oc; ++o) {
                const RingElement b_scaled =
                    ring_mul(encode_fixed(l.bias[o], cfg), RingElement{std::uint64_t{1} << f}, cfg);
                for (std::uint32_t i = 0; i < out_s.h; ++i)
                    for (std::uint32_t j = 0; j < out_s.w; ++j) {
                        RingElement acc = b_scaled;
                        for (std::uint32_t c = 0; c < ic; ++c)
                            for (std::uint32_t a = 0; a < k; ++a)
                                for (std::uint32_t b = 0; b < k; ++b)
                                    acc = ring_add(acc,
                                                   ring_mul(x[((i + a) * s.w + (j + b)) * s.c + c],
                                                            encode_fixed(l.weights[((o * ic + c) * k + a) * k + b], cfg),
                                                            cfg),
                                                   cfg);
                        y[(i * out_s.w + j) * oc + o] = fixed_trunc(acc, f, cfg);
                    }
            }
            break;
        }
        case LayerKind::ReLU:
            for (std::size_t i = 0; i < x.size(); ++i)
                y[i] = signed_value(x[i], cfg) <= 0 ? RingElement{0} : x[i];
            break;
        case LayerKind::MaxPool2:
            for (std::uint32_t i = 0; i < out_s.h; ++i)
                for (std::uint32_t j = 0; j < out_s.w; ++j)
                    for (std::uint32_t c = 0; c < s.c; ++c) {
                        // Tournament order matches the secure pipeline:
                        // max(max(w00,w01), max(w10,w11)) with ties keeping
                        // the second operand.
                        auto pick = [&](RingElement u, RingElement v) {
                            return signed_value(ring_sub(u, v, cfg), cfg) > 0 ? u : v;
                        };
                        const RingElement w00 = x[((2 * i) * s.w + 2 * j) * s.c + c];
                        const RingElement w01 = x[((2 * i) * s.w + 2 * j + 1) * s.c + c];
                        const RingElement w10 = x[((2 * i + 1) * s.w + 2 * j) * s.c + c];
                        const RingElement w11 = x[((2 * i + 1) * s.w + 2 * j + 1) * s.c + c];
                        y[(i * out_s.w + j) * s.c + c] = pick(pick(w00, w01), pick(w10, w11));
                    }
            break;
        case LayerKind::AvgPool2:
            for (std::uint32_t i = 0; i < out_s.h; ++i)
                for (std::uint32_t j = 0; j < out_s.w; ++j)
                    for (std::uint32_t c = 0; c < s.c; ++c) {
                        RingElement acc{0};
                        for (int a = 0; a < 2; ++a)
                            for (int b = 0; b < 2; ++b)
                                acc = ring_add(acc, x[((2 * i + a) * s.w + (2 * j + b)) * s.c + c], cfg);
                        y[(i * out_s.w + j) * s.c + c] = fixed_trunc(ring_mul(acc, quarter, cfg), f, cfg);
                    }
            break;
        case LayerKind::Flatten:
            y = x;
            break;
        case LayerKind::Dense: {
            const std::uint32_t in_n = dense_in(l.spec), out_n = dense_out(l.spec);
            for (std::uint32_t o = 0; o < out_n; ++o) {
                RingElement acc =
                    ring_mul(encode_fixed(l.bias[o], cfg), RingElement{std::uint64_t{1} << f}, cfg);
                for (std::uint32_t i = 0; i < in_n; ++i)
                    acc = ring_add(acc, ring_mul(x[i], encode_fixed(l.weights[o * in_n + i], cfg), cfg),
                                   cfg);
                y[o] = fixed_trunc(acc, f, cfg);
            }
            break;
        }
        }
        x = std::move(y);
        s = out_s;
    }
    return x;
}

std::pair<SharedModel, SharedModel> encrypt_model(const ModelParams& m,
                                                  const FixedPointConfig& cfg, Rng& rng) {
    SharedModel p0, p1;
    p0.party = 0;
    p1.party = 1;
    p0.cfg = p1.cfg = cfg;
    for (const Layer& l : m.layers) {
        std::vector<RingElement> w(l.weights.size()), b(l.bias.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = encode_fixed(l.weights[i], cfg);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = encode_fixed(l.bias[i], cfg);
        auto ws = share(w, 2, rng, cfg);
        auto bs = share(b, 2, rng, cfg);
        p0.layers.push_back(SharedLayer{l.spec, std::move(ws[0]), std::move(bs[0])});
        p1.layers.push_back(SharedLayer{l.spec, std::move(ws[1]), std::move(bs[1])});
    }
    return {std::move(p0), std::move(p1)};
}

ModelParams decrypt_model(const SharedModel& a, const SharedModel& b) {
    if (a.layers.size() != b.layers.size()) throw ProtocolError("decrypt_model: layer mismatch");
    ModelParams m;
    for (std::size_t li = 0; li < a.layers.size(); ++li) {
        Layer l;
        l.spec = a.layers[li].spec;
        const ShareVector wsv[2] = {a.layers[li].weights, b.layers[li].weights};
        const ShareVector bsv[2] = {a.layers[li].bias, b.layers[li].bias};
        const auto w = reconstruct(std::span<const ShareVector>(wsv, 2));
        const auto bb = reconstruct(std::span<const ShareVector>(bsv, 2));
        l.weights.resize(w.size());
        l.bias.resize(bb.size());
        for (std::size_t i = 0; i < w.size(); ++i) l.weights[i] = decode_fixed(w[i], a.cfg);
        for (std::size_t i = 0; i < bb.size(); ++i) l.bias[i] = decode_fixed(bb[i], a.cfg);
        m.layers.push_back(std::move(l));
    }
    return m;
}

double secure_vs_fixed_budget_lsb(const ModelParams& m, const TensorShape& in,
                                  const FixedPointConfig& cfg) {
    // Per truncated output the secure path differs from the deterministic
    // floor by at most 2 LSB (1 for the probabilistic offset, 1 for flooring
    // a shifted argument); linear layers scale the incoming deviation by
    // their absolute row sums; relu and pools are 1-Lipschitz. The factor 2
    // at the end gates argmax safety.
    TensorShape s = in;
    double err = 0.0;
    const double lsb = 2.0;
    for (const Layer& l : m.layers) {
        const TensorShape out_s = layer_output_shape(l.spec, s);
        switch (l.spec.kind) {
        case LayerKind::Conv2d: {
            const std::uint32_t k = conv_k(l.spec), ic = conv_in_c(l.spec), oc = conv_out_c(l.spec);
            double max_row = 0;
            for (std::uint32_t o = 0; o < oc; ++o) {
                double row = 0;
                for (std::uint32_t i = 0; i < ic * k * k; ++i)
                    row += std::abs(l.weights[o * ic * k * k + i]);
                max_row = std::max(max_row, row);
            }
            err = max_row * err + lsb;
            break;
        }
        case LayerKind::Dense: {
            const std::uint32_t in_n = dense_in(l.spec), out_n = dense_out(l.spec);
            double max_row = 0;
            for (std::uint32_t o = 0; o < out_n; ++o) {
                double row = 0;
                for (std::uint32_t i = 0; i < in_n; ++i) row += std::abs(l.weights[o * in_n + i]);
                max_row = std::max(max_row, row);
            }
            err = max_row * err + lsb;
            break;
        }
        case LayerKind::AvgPool2:
            err = err + lsb;
            break;
        case LayerKind::ReLU:
        case LayerKind::MaxPool2:
        case LayerKind::Flatten:
            break;
        }
        s = out_s;
    }
    return 2.0 * err;
}

// ---- model files -----------------------------------------------------------

namespace {

constexpr char kModelMagic[8] = {'S', 'M', 'P', 'C', 'M', 'O', 'D', 'L'};
constexpr std::uint16_t kModelVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
    char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
        buf[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
    os.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    char buf[sizeof(T)];
    is.read(buf, sizeof(T));
    if (!is) throw ConfigError("model file truncated");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[i])) << (8 * i);
    return static_cast<T>(v);
}

void put_elems(std::ostream& os, std::span<const RingElement> vals, const FixedPointConfig& cfg) {
    const auto bytes = serialize_elements(vals, cfg);
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<RingElement> get_elems(std::istream& is, std::size_t count, const FixedPointConfig& cfg) {
    std::vector<std::uint8_t> bytes(count * cfg.elem_bytes());
    is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!is) throw ConfigError("model file truncated");
    return deserialize_elements(bytes, cfg);
}

void write_header(std::ostream& os, const FixedPointConfig& cfg, std::uint8_t mode,
                  std::uint8_t party, std::uint16_t layer_count) {
    os.write(kModelMagic, sizeof(kModelMagic));
    put<std::uint16_t>(os, kModelVersion);
    put<std::uint16_t>(os, static_cast<std::uint16_t>(cfg.ring_bits));
    put<std::uint16_t>(os, static_cast<std::uint16_t>(cfg.frac_bits));
    put<std::uint8_t>(os, mode);
    put<std::uint8_t>(os, party);
    put<std::uint16_t>(os, layer_count);
}

struct ModelHeader {
    FixedPointConfig cfg;
    std::uint8_t mode = 0;
    std::uint8_t party = 0xff;
    std::uint16_t layer_count = 0;
};

ModelHeader read_header(std::istream& is, const std::string& path) {
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kModelMagic, sizeof(kModelMagic)) != 0)
        throw ConfigError("not a model file (bad magic): " + path);
    if (get<std::uint16_t>(is) != kModelVersion)
        throw ConfigError("unsupported model file version: " + path);
    ModelHeader h;
    h.cfg.ring_bits = get<std::uint16_t>(is);
    h.cfg.frac_bits = get<std::uint16_t>(is);
    h.cfg.validate();
    h.mode = get<std::uint8_t>(is);
    h.party = get<std::uint8_t>(is);
    h.layer_count = get<std::uint16_t>(is);
    return h;
}

void write_layer_spec(std::ostream& os, const LayerSpec& spec) {
    put<std::uint8_t>(os, static_cast<std::uint8_t>(spec.kind));
    put<std::uint8_t>(os, static_cast<std::uint8_t>(spec.dims.size()));
    for (auto d : spec.dims) put<std::uint32_t>(os, d);
}

LayerSpec read_layer_spec(std::istream& is) {
    LayerSpec spec;
    const auto kind = get<std::uint8_t>(is);
    if (kind < 1 || kind > 6) throw ConfigError("model file: bad layer kind");
    spec.kind = static_cast<LayerKind>(kind);
    const auto nd = get<std::uint8_t>(is);
    spec.dims.resize(nd);
    for (auto& d : spec.dims) d = get<std::uint32_t>(is);
    return spec;
}

} // namespace

void write_model_file(const std::string& path, const ModelParams& m, const FixedPointConfig& cfg) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open model file for writing: " + path);
    write_header(os, cfg, 0, 0xff, static_cast<std::uint16_t>(m.layers.size()));
    for (const Layer& l : m.layers) {
        write_layer_spec(os, l.spec);
        put<std::uint64_t>(os, l.weights.size());
        std::vector<RingElement> w(l.weights.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = encode_fixed(l.weights[i], cfg);
        put_elems(os, w, cfg);
        put<std::uint64_t>(os, l.bias.size());
        std::vector<RingElement> b(l.bias.size());
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = encode_fixed(l.bias[i], cfg);
        put_elems(os, b, cfg);
    }
    if (!os) throw ConfigError("write failed: " + path);
}

ModelParams read_model_file(const std::string& path, FixedPointConfig& cfg_out) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open model file: " + path);
    const ModelHeader h = read_header(is, path);
    if (h.mode != 0) throw ConfigError("expected plain model file: " + path);
    cfg_out = h.cfg;
    ModelParams m;
    for (std::uint16_t li = 0; li < h.layer_count; ++li) {
        Layer l;
        l.spec = read_layer_spec(is);
        const auto wc = get<std::uint64_t>(is);
        const auto w = get_elems(is, wc, h.cfg);
        const auto bc = get<std::uint64_t>(is);
        const auto b = get_elems(is, bc, h.cfg);
        l.weights.resize(wc);
        l.bias.resize(bc);
        for (std::size_t i = 0; i < wc; ++i) l.weights[i] = decode_fixed(w[i], h.cfg);
        for (std::size_t i = 0; i < bc; ++i) l.bias[i] = decode_fixed(b[i], h.cfg);
        m.layers.push_back(std::move(l));
    }
    return m;
}

void write_shared_model_file(const std::string& path, const SharedModel& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open model file for writing: " + path);
    write_header(os, m.cfg, 1, static_cast<std::uint8_t>(m.party),
                 static_cast<std::uint16_t>(m.layers.size()));
    for (const SharedLayer& l : m.layers) {
        write_layer_spec(os, l.spec);
        put<std::uint64_t>(os, l.weights.size());
        put_elems(os, l.weights.values, m.cfg);
        put<std::uint64_t>(os, l.bias.size());
        put_elems(os, l.bias.values, m.cfg);
    }
    if (!os) throw ConfigError("write failed: " + path);
}

SharedModel read_shared_model_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open model file: " + path);
    const ModelHeader h = read_header(is, path);
    if (h.mode != 1) throw ConfigError("expected shared model file: " + path);
    if (h.party > 1) throw ConfigError("shared model file with bad party id: " + path);
    SharedModel m;
    m.party = h.party;
    m.cfg = h.cfg;
    for (std::uint16_t li = 0; li < h.layer_count; ++li) {
        SharedLayer l;
        l.spec = read_layer_spec(is);
        const auto wc = get<std::uint64_t>(is);
        auto w = get_elems(is, wc, h.cfg);
        const auto bc = get<std::uint64_t>(is);
        auto b = get_elems(is, bc, h.cfg);
        l.weights.party = l.bias.party = m.party;
        l.weights.n_parties = l.bias.n_parties = 2;
        l.weights.cfg = l.bias.cfg = h.cfg;
        l.weights.values = std::move(w);
        l.bias.values = std::move(b);
        m.layers.push_back(std::move(l));
    }
    return m;
}

} // namespace smpcfl
