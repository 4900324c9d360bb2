#pragma once

#include <cstdint>
#include <vector>

#include "smpcfl/mpc_ops.hpp"
#include "smpcfl/nn.hpp"

namespace smpcfl {

// One party's view of a secret-shared tensor. Shape metadata is public and
// must agree at both parties; values are additive shares in row-major order.
struct SecretTensor {
    TensorShape shape;
    ShareVector shares;
};

// Encode + share an input image between the two computing parties.
std::pair<SecretTensor, SecretTensor> encrypt_input(const std::vector<double>& image,
                                                    const TensorShape& shape,
                                                    const FixedPointConfig& cfg, Rng& rng);

// Correlated-randomness demand of one encrypted inference.
struct InferenceCost {
    std::size_t triples = 0; // scalar multiplication triples
    std::size_t keys = 0;    // comparison keys
};

InferenceCost count_inference_cost(const ModelParams& m, const TensorShape& in);
InferenceCost count_inference_cost(const std::vector<LayerSpec>& specs, const TensorShape& in,
                                   int num_classes);

// Individual secure layers (SPMD: each party calls with its own session).
SecretTensor secure_dense(MpcSession& s, const SecretTensor& x, const SharedLayer& layer);
SecretTensor secure_conv2d(MpcSession& s, const SecretTensor& x, const SharedLayer& layer);
SecretTensor secure_relu_layer(MpcSession& s, const SecretTensor& x);
SecretTensor secure_maxpool2(MpcSession& s, const SecretTensor& x);
SecretTensor secure_avgpool2(MpcSession& s, const SecretTensor& x);
SecretTensor secure_flatten(const SecretTensor& x);

// Full forward pass plus secure argmax; only the winning class index is
// opened. Aborts the whole inference if any sub-protocol fails.
int encrypted_inference(MpcSession& s, const SharedModel& model, const SecretTensor& input);

// Convenience driver: encrypts model and inputs, sizes the pools from a cost
// query, runs both party programs under simnet, and checks agreement.
struct EncryptedInferenceResult {
    std::vector<int> predictions;
    Transcript transcript;
};

EncryptedInferenceResult run_encrypted_inference(const ModelParams& model,
                                                 const std::vector<std::vector<double>>& images,
                                                 const TensorShape& in,
                                                 const FixedPointConfig& cfg, std::uint64_t seed,
                                                 const LinkModel& link, const SimOptions& opts = {});

// Same driver but starting from per-party shared-model halves (e.g. loaded
// from SMPCMODL files).
EncryptedInferenceResult run_encrypted_inference_shared(
    const SharedModel& m0, const SharedModel& m1,
    const std::vector<std::vector<double>>& images, const TensorShape& in, std::uint64_t seed,
    const LinkModel& link, const SimOptions& opts = {});

} // namespace smpcfl
