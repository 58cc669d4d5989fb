#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedhar/data/windowed.hpp"
#include "fedhar/model_params.hpp"
#include "fedhar/tensor.hpp"

namespace fedhar::nn {

// One conv stage: valid 1-D convolution + ReLU, followed by non-overlapping
// max pooling when pool > 1 (pool == 1 skips the pooling step).
struct ConvBlock {
    std::size_t filters = 0;
    std::size_t kernel = 0;
    std::size_t pool = 1;
};

// Architecture of the small HAR classifier:
//   blocks of (conv -> ReLU -> maxpool), flatten, dense(hidden) -> ReLU ->
//   dropout -> dense(classes).
struct ConvNetSpec {
    std::size_t in_channels = 3;
    std::size_t window_len = 128;
    std::size_t classes = 6;
    std::vector<ConvBlock> conv_blocks = {{32, 5, 2}, {64, 5, 2}};
    std::size_t dense_hidden = 64;
    double dropout_rate = 0.0;  // applied before the final dense layer
    double l2_lambda = 0.0;

    void validate() const;  // ConfigError when the temporal chain collapses

    // Temporal length after each conv/pool stage; front() is window_len.
    std::vector<std::size_t> temporal_chain() const;
    std::size_t flatten_len() const;
};

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t local_epochs = 1;
    std::size_t batch_size = 32;
    double prox_mu = 0.0;  // 0 disables the proximal term
    std::uint64_t rng_seed = 0;

    void validate() const;
};

enum class Mode { kTrain, kEval };

// Deterministic initialization: weights from a Glorot-style scaled uniform,
// U(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)), biases zero.
ModelParams init_params(const ConvNetSpec& spec, std::uint64_t seed);

// Logits [B, classes] for a batch [B, C, T]. In train mode, inverted dropout
// with the given seed; in eval mode dropout is the identity.
Tensor forward(const ModelParams& params, const ConvNetSpec& spec, const Tensor& batch,
               Mode mode, std::uint64_t dropout_seed = 0);

// Softmax rows of eval-mode logits; each row sums to 1.
Tensor predict_proba(const ModelParams& params, const ConvNetSpec& spec, const Tensor& batch);

struct LossGrads {
    double loss = 0.0;
    ModelParams grads;
};

// Total loss = mean softmax cross-entropy
//            + (l2_lambda/2)*||params||^2
//            + (prox_mu/2)*||params - global_ref||^2,
// with exact analytic gradients of that total. global_ref is required when
// prox_mu > 0.
LossGrads loss_and_grads(const ModelParams& params, const ConvNetSpec& spec,
                         const Tensor& batch, std::span<const int> labels,
                         const TrainConfig& cfg, const ModelParams* global_ref,
                         std::uint64_t dropout_seed);

inline LossGrads loss_and_grads(const ModelParams& params, const ConvNetSpec& spec,
                                const Tensor& batch, std::span<const int> labels,
                                const TrainConfig& cfg,
                                const ModelParams* global_ref = nullptr) {
    return loss_and_grads(params, spec, batch, labels, cfg, global_ref, cfg.rng_seed);
}

// out = params - learning_rate * grads, elementwise.
ModelParams sgd_step(const ModelParams& params, const ModelParams& grads,
                     double learning_rate);

// cfg.local_epochs epochs of mini-batch SGD with deterministic shuffling from
// cfg.rng_seed. The input params are left untouched.
ModelParams local_train(const ModelParams& params, const ConvNetSpec& spec,
                        const data::WindowedDataset& dataset, const TrainConfig& cfg,
                        const ModelParams* global_ref = nullptr);

}  // namespace fedhar::nn
