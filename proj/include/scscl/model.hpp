#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scscl/losses.hpp"
#include "scscl/matrix.hpp"
#include "scscl/rng.hpp"

namespace scscl {

struct DenseLayer {
    Matrix w;  // in x out
    std::vector<double> bias;
};

/// Fully connected stack with ReLU between layers and a linear final layer.
struct MlpParams {
    std::vector<DenseLayer> layers;
};

struct MlpCache {
    Matrix input;
    std::vector<Matrix> pre;   // pre-activation per layer
    std::vector<Matrix> post;  // after ReLU (last layer: == pre)
};

Matrix mlp_forward(const MlpParams& mlp, const Matrix& x, MlpCache& cache);

/// Returns grad w.r.t. the input; fills `grads` with parameter gradients.
Matrix mlp_backward(const MlpParams& mlp, const MlpCache& cache, const Matrix& grad_out,
                    MlpParams& grads);

/// The trainable Stage-1 stack: encoder -> projection -> field split with
/// per-field normalization, plus the two boundary scalars.
struct ModelState {
    MlpParams encoder;
    MlpParams projection;
    BoundaryParams boundary;
    FieldPartition partition;
};

struct ForwardCache {
    MlpCache encoder;
    MlpCache projection;
    Matrix proj_raw;  // projection output before normalization
    FieldNormCache norm_common;
    FieldNormCache norm_style;
    bool valid = false;
};

struct ForwardResult {
    Matrix embedding;  // B x D_p, per-field normalized
    bool any_degenerate = false;
};

ForwardResult forward(const ModelState& state, const Matrix& x, ForwardCache& cache);

struct ModelGrads {
    MlpParams encoder;
    MlpParams projection;
    double t_log = 0.0;
    double b = 0.0;
};

/// Backprop grad_embedding (w.r.t. the normalized embedding) through the
/// field normalization, projection, and encoder.
ModelGrads backward(const ModelState& state, const ForwardCache& cache,
                    const Matrix& grad_embedding);

struct ModelSizes {
    std::size_t input_dim = 16;
    std::vector<std::size_t> encoder_hidden = {64, 64};
    std::size_t projection_hidden = 0;  // 0 -> defaults to D_p
    FieldPartition partition;
};

ModelState init_model(const ModelSizes& sizes, std::uint64_t seed, double t0 = 0.1,
                      double b0 = 0.0);

/// Stage-2 head. Reads the common field only, by construction.
struct LinearClassifier {
    Matrix weight;  // D_c x C
    std::vector<double> bias;
};

LinearClassifier init_classifier(std::size_t d_common, std::size_t n_classes, std::uint64_t seed);

Matrix classify(const LinearClassifier& clf, const Matrix& common);

void save_checkpoint(const ModelState& state, std::uint64_t seed, const std::string& path);

struct Checkpoint {
    ModelState state;
    std::uint64_t seed = 0;
};

Checkpoint load_checkpoint(const std::string& path);

/// FNV-1a over the raw bytes of every parameter; used by freeze-contract
/// assertions.
std::uint64_t state_hash(const ModelState& state);

}  // namespace scscl
