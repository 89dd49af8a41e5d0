#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qtmrl/core.hpp"
#include "qtmrl/rng.hpp"

namespace qtmrl {

/// Dense row-major matrix, 64-bit throughout. The networks here are small
/// enough that reproducibility and gradient-check fidelity matter more
/// than single-precision speed.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct DenseLayer {
    Matrix weights;             // out x in
    std::vector<double> bias;   // out
};

/// Feed-forward stack: affine + ReLU on hidden layers, linear final layer.
struct MlpParams {
    std::vector<DenseLayer> layers;

    std::size_t input_size() const { return layers.front().weights.cols; }
    std::size_t output_size() const { return layers.back().weights.rows; }
    std::size_t parameter_count() const;
    std::vector<std::size_t> layer_dims() const;  // [in, h1, ..., out]
};

/// He-normal weights, zero biases, drawn from the supplied generator.
MlpParams make_mlp(const std::vector<std::size_t>& dims, Rng& rng);

/// Activations per layer kept for the backward pass. pre[l] is the
/// pre-activation of layer l, act[l] its output (act[0] is the input).
struct ForwardCache {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> act;

    const std::vector<double>& output() const { return act.back(); }
};

std::vector<double> forward(const MlpParams& params, std::span<const double> input);
ForwardCache forward_cached(const MlpParams& params, std::span<const double> input);

/// Per-parameter gradients, shapes mirroring MlpParams.
struct MlpGrads {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> bias;

    static MlpGrads zeros_like(const MlpParams& params);
    void accumulate(const MlpGrads& other);
    void scale(double factor);
};

/// Exact analytic gradients of the network under the upstream gradient
/// dL/d(output). Adds into `grads` so rollout samples can share one buffer.
void backward(const MlpParams& params, const ForwardCache& cache,
              std::span<const double> upstream, MlpGrads& grads);

/// Max-subtracted exponential normalization. Throws on non-finite logits.
std::vector<double> softmax(std::span<const double> logits);

/// -sum(p log p) with 0 log 0 = 0.
double entropy(std::span<const double> probs);

struct ActionSample {
    std::size_t action;
    double log_prob;
};
/// Inverse-CDF draw from the supplied generator.
ActionSample sample_action(std::span<const double> probs, Rng& rng);

/// Bias-corrected Adam. Accumulator shapes mirror the parameters.
struct AdamState {
    double learning_rate = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long long step = 0;
    std::vector<Matrix> m_weights, v_weights;
    std::vector<std::vector<double>> m_bias, v_bias;

    static AdamState init(const MlpParams& params, double learning_rate);
};

/// One update in place. Non-finite gradients raise Error("non-finite")
/// naming the offending layer.
void adam_step(AdamState& adam, MlpParams& params, const MlpGrads& grads);

/// Versioned JSON checkpoint: header (layer dims, feature-names hash,
/// config hash, normalization stats) plus row-major weight arrays printed
/// as full-precision decimals. Loading validates dimensions against the
/// header and throws Error("checkpoint-mismatch") on disagreement.
struct Checkpoint {
    int version = 1;
    std::string config_hash;
    std::string feature_names_hash;
    MlpParams actor;
    MlpParams critic;
    std::vector<double> norm_mean, norm_stddev;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace qtmrl
