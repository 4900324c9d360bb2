#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "smpcfl/ring.hpp"
#include "smpcfl/rng.hpp"
#include "smpcfl/sharing.hpp"

namespace smpcfl {

enum class LayerKind : std::uint8_t {
    Conv2d = 1,   // dims = {in_channels, out_channels, ksize}; valid padding, stride 1
    ReLU = 2,
    MaxPool2 = 3, // 2x2 window, stride 2
    AvgPool2 = 4,
    Flatten = 5,
    Dense = 6,    // dims = {in, out}
};

struct LayerSpec {
    LayerKind kind;
    std::vector<std::uint32_t> dims;
};

// Plaintext layer: float weights in row-major order. Conv weights are
// [out_c][in_c][k][k], dense weights [out][in].
struct Layer {
    LayerSpec spec;
    std::vector<double> weights;
    std::vector<double> bias;
};

// Plain (hospital-side) network parameters.
struct ModelParams {
    std::vector<Layer> layers;

    std::size_t parameter_count() const;
};

// One computing party's share of an encoded model.
struct SharedLayer {
    LayerSpec spec;
    ShareVector weights;
    ShareVector bias;
};

struct SharedModel {
    int party = -1;
    FixedPointConfig cfg;
    std::vector<SharedLayer> layers;
};

// Image tensors are row-major (h, w, c) vectors.
struct TensorShape {
    std::uint32_t h = 0, w = 0, c = 0;
    std::size_t count() const { return std::size_t{h} * w * c; }
};

// Output shape of a layer applied to `in`; throws ConfigError when the
// shapes do not compose (odd pool input, dense fan-in mismatch, ...).
TensorShape layer_output_shape(const LayerSpec& spec, const TensorShape& in);
TensorShape model_output_shape(const ModelParams& m, const TensorShape& in);
void check_model_shapes(const ModelParams& m, const TensorShape& in);

// Desk-scale reference CNN over 16x16x1 inputs:
// conv(8 filters 3x3) -> relu -> maxpool2 -> dense(32) -> relu -> dense(classes).
ModelParams make_reference_model(int num_classes, Rng& rng);

// Float forward pass; returns the logits.
std::vector<double> forward_float(const ModelParams& m, const std::vector<double>& image,
                                  const TensorShape& in);

// Fixed-point twin of the secure pipeline: identical operation order and
// truncation points, deterministic floor shifts. Returns encoded logits.
std::vector<RingElement> forward_fixed(const ModelParams& m, const std::vector<double>& image,
                                       const TensorShape& in, const FixedPointConfig& cfg);

int argmax_float(const std::vector<double>& logits);
int argmax_fixed(const std::vector<RingElement>& logits, const FixedPointConfig& cfg);

// Mini-batch SGD with manual backprop and softmax cross-entropy. Shuffles
// with `rng`; updates `m` in place and returns the mean loss.
double train_epoch(ModelParams& m, const std::vector<std::vector<double>>& images,
                   const std::vector<int>& labels, const TensorShape& in, double lr,
                   int batch_size, Rng& rng);

double cross_entropy_loss(const ModelParams& m, const std::vector<std::vector<double>>& images,
                          const std::vector<int>& labels, const TensorShape& in);
double accuracy(const ModelParams& m, const std::vector<std::vector<double>>& images,
                const std::vector<int>& labels, const TensorShape& in);

// Elementwise arithmetic mean of identically shaped models.
ModelParams fedavg_plain(const std::vector<ModelParams>& models);

// Split plaintext weights into two computing-party shares (encode + share).
std::pair<SharedModel, SharedModel> encrypt_model(const ModelParams& m,
                                                  const FixedPointConfig& cfg, Rng& rng);
// Reconstruct + decode; inverse of encrypt_model.
ModelParams decrypt_model(const SharedModel& a, const SharedModel& b);

// Upper bound, in output LSBs, on |secure logits - fixed-point twin logits|;
// grows with fan-in through dense/conv rows. Used to gate argmax equality.
double secure_vs_fixed_budget_lsb(const ModelParams& m, const TensorShape& in,
                                  const FixedPointConfig& cfg);

// Model file ("SMPCMODL"): plain mode stores encoded weights, shared mode one
// file per party. Bit-exact: little-endian, elem_bytes() per element.
void write_model_file(const std::string& path, const ModelParams& m,
                      const FixedPointConfig& cfg);
void write_shared_model_file(const std::string& path, const SharedModel& m);
ModelParams read_model_file(const std::string& path, FixedPointConfig& cfg_out);
SharedModel read_shared_model_file(const std::string& path);

} // namespace smpcfl
