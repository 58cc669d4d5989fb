#include "fedhar/nn/convnet.hpp"

#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

#include "fedhar/errors.hpp"
#include "fedhar/nn/kernels.hpp"
#include "fedhar/rng.hpp"

namespace fedhar::nn {

namespace k = kernels::par;

void ConvNetSpec::validate() const {
    if (classes < 2) throw ConfigError("model: classes must be >= 2");
    if (in_channels == 0 || window_len == 0) throw ConfigError("model: empty input shape");
    if (conv_blocks.empty()) throw ConfigError("model: at least one conv block required");
    if (dense_hidden == 0) throw ConfigError("model: dense_hidden must be >= 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw ConfigError("model: dropout_rate must be in [0,1)");
    }
    if (l2_lambda < 0.0) throw ConfigError("model: l2_lambda must be >= 0");
    std::size_t t = window_len;
    for (std::size_t i = 0; i < conv_blocks.size(); ++i) {
        const auto& blk = conv_blocks[i];
        if (blk.filters == 0 || blk.kernel == 0 || blk.pool == 0) {
            throw ConfigError("model: conv block " + std::to_string(i) + " has a zero field");
        }
        if (blk.kernel > t) {
            throw ConfigError("model: conv block " + std::to_string(i) +
                              " kernel exceeds temporal length " + std::to_string(t));
        }
        t = t - blk.kernel + 1;
        if (blk.pool > 1) {
            t = t / blk.pool;
            if (t < 1) {
                throw ConfigError("model: pooling in block " + std::to_string(i) +
                                  " reduces temporal length below 1");
            }
        }
    }
}

std::vector<std::size_t> ConvNetSpec::temporal_chain() const {
    std::vector<std::size_t> chain{window_len};
    std::size_t t = window_len;
    for (const auto& blk : conv_blocks) {
        t = t - blk.kernel + 1;
        if (blk.pool > 1) t = t / blk.pool;
        chain.push_back(t);
    }
    return chain;
}

std::size_t ConvNetSpec::flatten_len() const {
    return conv_blocks.back().filters * temporal_chain().back();
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
    if (local_epochs < 1) throw ConfigError("train: local_epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (prox_mu < 0.0) throw ConfigError("train: prox_mu must be >= 0");
}

namespace {

std::string conv_name(std::size_t i, const char* part) {
    return "conv" + std::to_string(i + 1) + "." + part;
}

Tensor glorot_uniform(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                      Rng& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = rng.uniform(-limit, limit);
    return t;
}

void check_batch(const ConvNetSpec& spec, const Tensor& batch) {
    if (batch.ndim() != 3 || batch.dim(1) != spec.in_channels ||
        batch.dim(2) != spec.window_len) {
        throw ShapeError("batch shape " + shape_to_string(batch.shape) +
                         " does not match model input [B," +
                         std::to_string(spec.in_channels) + "," +
                         std::to_string(spec.window_len) + "]");
    }
}

// Everything the backward pass needs from one forward evaluation.
struct ForwardCache {
    std::vector<Tensor> conv_pre;    // per block, [B,F,L] before ReLU
    std::vector<Tensor> conv_act;    // per block, after ReLU
    std::vector<Tensor> pool_out;    // per block (pool>1 only, else unused)
    std::vector<std::vector<std::int32_t>> pool_argmax;
    Tensor dense1_pre;               // [B,H]
    Tensor dense1_act;               // [B,H]
    std::vector<double> dropout_mask;  // per activation: 0 or 1/(1-rate)
    Tensor dense1_dropped;           // [B,H]
    Tensor logits;                   // [B,classes]
    const Tensor* input = nullptr;
};

void run_forward(const ModelParams& params, const ConvNetSpec& spec, const Tensor& batch,
                 Mode mode, std::uint64_t dropout_seed, ForwardCache& cache) {
    check_batch(spec, batch);
    const std::size_t B = batch.dim(0);
    cache.input = &batch;

    const Tensor* cur = &batch;
    std::size_t cur_channels = spec.in_channels;
    std::size_t cur_len = spec.window_len;

    const std::size_t n_blocks = spec.conv_blocks.size();
    cache.conv_pre.resize(n_blocks);
    cache.conv_act.resize(n_blocks);
    cache.pool_out.resize(n_blocks);
    cache.pool_argmax.resize(n_blocks);

    for (std::size_t i = 0; i < n_blocks; ++i) {
        const auto& blk = spec.conv_blocks[i];
        const Tensor& w = params.at(conv_name(i, "weight"));
        const Tensor& b = params.at(conv_name(i, "bias"));
        const std::size_t L = cur_len - blk.kernel + 1;

        cache.conv_pre[i] = Tensor::zeros({B, blk.filters, L});
        k::conv1d_forward(cur->data.data(), B, cur_channels, cur_len, w.data.data(),
                          b.data.data(), blk.filters, blk.kernel,
                          cache.conv_pre[i].data.data());

        cache.conv_act[i] = Tensor::zeros({B, blk.filters, L});
        k::relu_forward(cache.conv_pre[i].data.data(), cache.conv_pre[i].size(),
                        cache.conv_act[i].data.data());

        if (blk.pool > 1) {
            const std::size_t Lp = L / blk.pool;
            cache.pool_out[i] = Tensor::zeros({B, blk.filters, Lp});
            cache.pool_argmax[i].resize(B * blk.filters * Lp);
            k::maxpool1d_forward(cache.conv_act[i].data.data(), B, blk.filters, L, blk.pool,
                                 cache.pool_out[i].data.data(), cache.pool_argmax[i].data());
            cur = &cache.pool_out[i];
            cur_len = Lp;
        } else {
            cur = &cache.conv_act[i];
            cur_len = L;
        }
        cur_channels = blk.filters;
    }

    // [B, F, L] is already contiguous per batch item, so the flatten is a view.
    const std::size_t flat = cur_channels * cur_len;
    const Tensor& w1 = params.at("dense1.weight");
    const Tensor& b1 = params.at("dense1.bias");
    const std::size_t H = spec.dense_hidden;

    cache.dense1_pre = Tensor::zeros({B, H});
    k::dense_forward(cur->data.data(), B, flat, w1.data.data(), b1.data.data(), H,
                     cache.dense1_pre.data.data());
    cache.dense1_act = Tensor::zeros({B, H});
    k::relu_forward(cache.dense1_pre.data.data(), cache.dense1_pre.size(),
                    cache.dense1_act.data.data());

    // Inverted dropout: surviving activations are scaled by 1/(1-rate) at
    // train time so eval mode needs no rescaling. The mask is generated
    // serially from the seed, independent of thread count.
    cache.dense1_dropped = cache.dense1_act;
    if (mode == Mode::kTrain && spec.dropout_rate > 0.0) {
        Rng rng(derive_seed(dropout_seed, "dropout-mask"));
        const double keep = 1.0 - spec.dropout_rate;
        const double scale = 1.0 / keep;
        cache.dropout_mask.resize(B * H);
        for (std::size_t i = 0; i < B * H; ++i) {
            cache.dropout_mask[i] = rng.uniform() < keep ? scale : 0.0;
        }
        for (std::size_t i = 0; i < B * H; ++i) {
            cache.dense1_dropped.data[i] *= cache.dropout_mask[i];
        }
    }

    const Tensor& w2 = params.at("dense2.weight");
    const Tensor& b2 = params.at("dense2.bias");
    cache.logits = Tensor::zeros({B, spec.classes});
    k::dense_forward(cache.dense1_dropped.data.data(), B, H, w2.data.data(), b2.data.data(),
                     spec.classes, cache.logits.data.data());
}

}  // namespace

ModelParams init_params(const ConvNetSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(derive_seed(seed, "param-init"));
    ModelParams params;
    std::size_t in_ch = spec.in_channels;
    for (std::size_t i = 0; i < spec.conv_blocks.size(); ++i) {
        const auto& blk = spec.conv_blocks[i];
        params.add(conv_name(i, "weight"),
                   glorot_uniform({blk.filters, in_ch, blk.kernel}, in_ch * blk.kernel,
                                  blk.filters * blk.kernel, rng));
        params.add(conv_name(i, "bias"), Tensor::zeros({blk.filters}));
        in_ch = blk.filters;
    }
    const std::size_t flat = spec.flatten_len();
    params.add("dense1.weight",
               glorot_uniform({flat, spec.dense_hidden}, flat, spec.dense_hidden, rng));
    params.add("dense1.bias", Tensor::zeros({spec.dense_hidden}));
    params.add("dense2.weight",
               glorot_uniform({spec.dense_hidden, spec.classes}, spec.dense_hidden,
                              spec.classes, rng));
    params.add("dense2.bias", Tensor::zeros({spec.classes}));
    return params;
}

Tensor forward(const ModelParams& params, const ConvNetSpec& spec, const Tensor& batch,
               Mode mode, std::uint64_t dropout_seed) {
    ForwardCache cache;
    run_forward(params, spec, batch, mode, dropout_seed, cache);
    cache.logits.validate("forward logits");
    return std::move(cache.logits);
}

Tensor predict_proba(const ModelParams& params, const ConvNetSpec& spec, const Tensor& batch) {
    Tensor logits = forward(params, spec, batch, Mode::kEval);
    k::softmax_rows(logits.data.data(), logits.dim(0), logits.dim(1));
    return logits;
}

LossGrads loss_and_grads(const ModelParams& params, const ConvNetSpec& spec,
                         const Tensor& batch, std::span<const int> labels,
                         const TrainConfig& cfg, const ModelParams* global_ref,
                         std::uint64_t dropout_seed) {
    spec.validate();
    if (labels.size() != batch.dim(0)) {
        throw ShapeError("labels count does not match batch size");
    }
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= spec.classes) {
            throw DataError("label " + std::to_string(y) + " outside [0, classes)");
        }
    }
    if (cfg.prox_mu > 0.0) {
        if (!global_ref) {
            throw ConfigError("prox_mu > 0 requires a global reference model");
        }
        params.require_compatible(*global_ref, "proximal term");
    }

    ForwardCache cache;
    run_forward(params, spec, batch, Mode::kTrain, dropout_seed, cache);

    const std::size_t B = batch.dim(0);
    const std::size_t K = spec.classes;

    // Stable cross-entropy straight from logits; probs reuses the logit
    // buffer for the gradient.
    Tensor probs = cache.logits;
    double data_loss = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        double* row = probs.data.data() + b * K;
        double mx = row[0];
        for (std::size_t j = 1; j < K; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < K; ++j) sum += std::exp(row[j] - mx);
        double lse = mx + std::log(sum);
        data_loss += lse - row[static_cast<std::size_t>(labels[b])];
        for (std::size_t j = 0; j < K; ++j) row[j] = std::exp(row[j] - lse);
    }
    data_loss /= static_cast<double>(B);

    // dlogits = (softmax - onehot) / B
    Tensor dlogits = std::move(probs);
    const double invB = 1.0 / static_cast<double>(B);
    for (std::size_t b = 0; b < B; ++b) {
        double* row = dlogits.data.data() + b * K;
        row[static_cast<std::size_t>(labels[b])] -= 1.0;
        for (std::size_t j = 0; j < K; ++j) row[j] *= invB;
    }

    ModelParams grads;
    std::size_t in_ch = spec.in_channels;
    for (std::size_t i = 0; i < spec.conv_blocks.size(); ++i) {
        const auto& blk = spec.conv_blocks[i];
        grads.add(conv_name(i, "weight"), Tensor::zeros({blk.filters, in_ch, blk.kernel}));
        grads.add(conv_name(i, "bias"), Tensor::zeros({blk.filters}));
        in_ch = blk.filters;
    }
    const std::size_t flat = spec.flatten_len();
    const std::size_t H = spec.dense_hidden;
    grads.add("dense1.weight", Tensor::zeros({flat, H}));
    grads.add("dense1.bias", Tensor::zeros({H}));
    grads.add("dense2.weight", Tensor::zeros({H, K}));
    grads.add("dense2.bias", Tensor::zeros({K}));

    // dense2 backward
    Tensor dhd = Tensor::zeros({B, H});
    k::dense_backward(cache.dense1_dropped.data.data(), B, H,
                      params.at("dense2.weight").data.data(), K, dlogits.data.data(),
                      grads.at("dense2.weight").data.data(),
                      grads.at("dense2.bias").data.data(), dhd.data.data());

    // dropout backward uses the identical mask
    if (!cache.dropout_mask.empty()) {
        for (std::size_t i = 0; i < dhd.size(); ++i) dhd.data[i] *= cache.dropout_mask[i];
    }

    // dense1 ReLU + linear backward
    Tensor dpre1 = Tensor::zeros({B, H});
    k::relu_backward(cache.dense1_pre.data.data(), dhd.data.data(), dhd.size(),
                     dpre1.data.data());

    const std::size_t n_blocks = spec.conv_blocks.size();
    const Tensor& last_out =
        spec.conv_blocks.back().pool > 1 ? cache.pool_out[n_blocks - 1]
                                         : cache.conv_act[n_blocks - 1];
    Tensor dflat = Tensor::zeros({B, flat});
    k::dense_backward(last_out.data.data(), B, flat, params.at("dense1.weight").data.data(),
                      H, dpre1.data.data(), grads.at("dense1.weight").data.data(),
                      grads.at("dense1.bias").data.data(), dflat.data.data());

    // Walk the conv chain backwards; dflat aliases the last block's output.
    auto chain = spec.temporal_chain();
    Tensor dcur = std::move(dflat);  // logically [B, F_last, L_last]
    for (std::size_t i = n_blocks; i-- > 0;) {
        const auto& blk = spec.conv_blocks[i];
        const std::size_t L_in = (i == 0 ? spec.window_len : chain[i]);
        const std::size_t L_conv = L_in - blk.kernel + 1;
        const std::size_t C_in = (i == 0 ? spec.in_channels : spec.conv_blocks[i - 1].filters);

        Tensor dact = Tensor::zeros({B, blk.filters, L_conv});
        if (blk.pool > 1) {
            k::maxpool1d_backward(dcur.data.data(), cache.pool_argmax[i].data(), B,
                                  blk.filters, L_conv, blk.pool, dact.data.data());
        } else {
            dact.data = std::move(dcur.data);
        }

        Tensor dpre = Tensor::zeros({B, blk.filters, L_conv});
        k::relu_backward(cache.conv_pre[i].data.data(), dact.data.data(), dact.size(),
                         dpre.data.data());

        const Tensor& block_in = (i == 0) ? *cache.input
                                 : (spec.conv_blocks[i - 1].pool > 1 ? cache.pool_out[i - 1]
                                                                     : cache.conv_act[i - 1]);
        Tensor din;
        double* din_ptr = nullptr;
        if (i > 0) {
            din = Tensor::zeros({B, C_in, L_in});
            din_ptr = din.data.data();
        }
        k::conv1d_backward(block_in.data.data(), B, C_in, L_in,
                           params.at(conv_name(i, "weight")).data.data(), blk.filters,
                           blk.kernel, dpre.data.data(),
                           grads.at(conv_name(i, "weight")).data.data(),
                           grads.at(conv_name(i, "bias")).data.data(), din_ptr);
        if (i > 0) dcur = std::move(din);
    }

    double loss = data_loss;

    // L2 weight decay over every parameter entry.
    if (spec.l2_lambda > 0.0) {
        loss += 0.5 * spec.l2_lambda * params_squared_norm(params);
        for (std::size_t e = 0; e < grads.size(); ++e) {
            const auto& p = params.entry(e).second;
            auto& g = grads.entry(e).second;
            for (std::size_t j = 0; j < g.size(); ++j) g.data[j] += spec.l2_lambda * p.data[j];
        }
    }

    // FedProx proximal pull toward the distributed global model.
    if (cfg.prox_mu > 0.0) {
        double sq = 0.0;
        for (std::size_t e = 0; e < grads.size(); ++e) {
            const auto& p = params.entry(e).second;
            const auto& r = global_ref->entry(e).second;
            auto& g = grads.entry(e).second;
            for (std::size_t j = 0; j < g.size(); ++j) {
                double d = p.data[j] - r.data[j];
                sq += d * d;
                g.data[j] += cfg.prox_mu * d;
            }
        }
        loss += 0.5 * cfg.prox_mu * sq;
    }

    if (!std::isfinite(loss) || !grads.all_finite()) {
        throw DataError("loss_and_grads produced non-finite values");
    }
    return {loss, std::move(grads)};
}

ModelParams sgd_step(const ModelParams& params, const ModelParams& grads,
                     double learning_rate) {
    params.require_compatible(grads, "sgd_step");
    return params_axpy(params, -learning_rate, grads);
}

ModelParams local_train(const ModelParams& params, const ConvNetSpec& spec,
                        const data::WindowedDataset& dataset, const TrainConfig& cfg,
                        const ModelParams* global_ref) {
    cfg.validate();
    dataset.validate();
    if (dataset.empty()) throw DataError("local_train: empty dataset");

    ModelParams current = params;
    const std::size_t n = dataset.size();

    for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng shuffler(derive_seed(cfg.rng_seed, "shuffle", epoch));
        shuffler.shuffle(order);

        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
            const std::size_t stop = std::min(start + cfg.batch_size, n);
            std::span<const std::size_t> idx(order.data() + start, stop - start);
            Tensor batch = dataset.gather(idx);
            std::vector<int> labels(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = dataset.labels[idx[i]];

            const std::uint64_t dropout_seed =
                derive_seed(cfg.rng_seed, "dropout-step", epoch, batch_index);
            LossGrads lg =
                loss_and_grads(current, spec, batch, labels, cfg, global_ref, dropout_seed);
            current = sgd_step(current, lg.grads, cfg.learning_rate);
        }
    }
    return current;
}

}  // namespace fedhar::nn
