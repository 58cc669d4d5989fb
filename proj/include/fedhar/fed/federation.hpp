#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "fedhar/data/windowed.hpp"
#include "fedhar/model_params.hpp"
#include "fedhar/nn/convnet.hpp"

namespace fedhar::fed {

using ClientId = int;

enum class Algorithm { kFedAvg, kFedProx };

struct FederatedConfig {
    std::size_t n_clients = 0;
    std::size_t rounds = 1;
    std::size_t sample_size = 1;  // m clients per round
    Algorithm algorithm = Algorithm::kFedAvg;
    nn::TrainConfig train_cfg;
    std::uint64_t sampling_seed = 0;

    void validate() const;
};

// Everything one round produced: who was selected, what they uploaded, and
// the aggregated global that follows.
struct RoundRecord {
    std::size_t round = 0;  // 1-based
    std::vector<ClientId> selected;
    std::map<ClientId, ModelParams> uploaded;
    ModelParams global_after;
};

// m distinct ids without replacement, deterministic in (sampling_seed, round).
// If `forced` is present and missing from the draw it is appended, so the
// result has m or m+1 ids. Returned sorted.
std::vector<ClientId> sample_clients(const FederatedConfig& cfg, std::size_t round,
                                     std::optional<ClientId> forced = std::nullopt);

// One synchronous round: every selected client trains from a copy of the
// current global (which also serves as the proximal reference under
// FedProx), and the new global is the unweighted mean of the uploads.
RoundRecord run_round(const ModelParams& global, const nn::ConvNetSpec& model_spec,
                      const std::map<ClientId, data::WindowedDataset>& clients,
                      const std::vector<ClientId>& selected, const FederatedConfig& cfg,
                      std::size_t round);

using RoundObserver = std::function<void(const RoundRecord&)>;

struct TrainingResult {
    ModelParams final_global;
    std::vector<RoundRecord> history;
};

// Runs cfg.rounds rounds from the given initial global model. The observer
// (when set) sees each RoundRecord after aggregation and before the next
// round. forced_round1 reproduces the attacker-controlled first selection.
TrainingResult run_training(const FederatedConfig& cfg,
                            const std::map<ClientId, data::WindowedDataset>& clients,
                            const nn::ConvNetSpec& model_spec, ModelParams initial_global,
                            const RoundObserver& observer = nullptr,
                            std::optional<ClientId> forced_round1 = std::nullopt);

struct EvalResult {
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

// Argmax accuracy and mean cross-entropy on a dataset, eval mode.
EvalResult evaluate(const ModelParams& params, const nn::ConvNetSpec& spec,
                    const data::WindowedDataset& dataset);

// Writes each round's uploads and aggregated global as parameter files plus
// manifest.jsonl (one record per round).
void export_history(const std::filesystem::path& dir,
                    const std::vector<RoundRecord>& history);

}  // namespace fedhar::fed
