#include "fedhar/fed/federation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fedhar/errors.hpp"
#include "fedhar/rng.hpp"

namespace fedhar::fed {

void FederatedConfig::validate() const {
    if (n_clients == 0) throw ConfigError("federated: n_clients must be >= 1");
    if (rounds < 1) throw ConfigError("federated: rounds must be >= 1");
    if (sample_size < 1 || sample_size > n_clients) {
        throw ConfigError("federated: sample_size must be in [1, n_clients]");
    }
    train_cfg.validate();
}

std::vector<ClientId> sample_clients(const FederatedConfig& cfg, std::size_t round,
                                     std::optional<ClientId> forced) {
    if (round < 1) throw ConfigError("sample_clients: rounds are 1-based");
    Rng rng(derive_seed(cfg.sampling_seed, "client-sampling", round));
    auto pick = rng.sample_without_replacement(cfg.n_clients, cfg.sample_size);
    std::vector<ClientId> selected;
    selected.reserve(pick.size() + 1);
    for (std::size_t p : pick) selected.push_back(static_cast<ClientId>(p));
    if (forced && std::find(selected.begin(), selected.end(), *forced) == selected.end()) {
        selected.push_back(*forced);
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

RoundRecord run_round(const ModelParams& global, const nn::ConvNetSpec& model_spec,
                      const std::map<ClientId, data::WindowedDataset>& clients,
                      const std::vector<ClientId>& selected, const FederatedConfig& cfg,
                      std::size_t round) {
    if (selected.empty()) throw ConfigError("run_round: no clients selected");
    for (ClientId id : selected) {
        auto it = clients.find(id);
        if (it == clients.end() || it->second.empty()) {
            throw DataError("run_round: client " + std::to_string(id) +
                            " has no training data");
        }
    }

    RoundRecord rec;
    rec.round = round;
    rec.selected = selected;

    const ModelParams* prox_ref =
        cfg.algorithm == Algorithm::kFedProx ? &global : nullptr;

    for (ClientId id : selected) {
        nn::TrainConfig local_cfg = cfg.train_cfg;
        local_cfg.rng_seed = derive_seed(cfg.train_cfg.rng_seed, "local-train", round,
                                         static_cast<std::uint64_t>(id));
        rec.uploaded.emplace(id, nn::local_train(global, model_spec, clients.at(id),
                                                 local_cfg, prox_ref));
    }

    // FedAvg: unweighted elementwise mean over the selected set, accumulated
    // in ascending client order so the result is thread-agnostic.
    std::vector<const ModelParams*> uploads;
    uploads.reserve(rec.uploaded.size());
    for (const auto& [_, params] : rec.uploaded) uploads.push_back(&params);
    rec.global_after = params_mean(uploads);

    return rec;
}

TrainingResult run_training(const FederatedConfig& cfg,
                            const std::map<ClientId, data::WindowedDataset>& clients,
                            const nn::ConvNetSpec& model_spec, ModelParams initial_global,
                            const RoundObserver& observer,
                            std::optional<ClientId> forced_round1) {
    cfg.validate();
    model_spec.validate();
    if (clients.size() != cfg.n_clients) {
        throw ConfigError("run_training: expected " + std::to_string(cfg.n_clients) +
                          " clients, got " + std::to_string(clients.size()));
    }

    TrainingResult result;
    result.history.reserve(cfg.rounds);
    ModelParams global = std::move(initial_global);

    for (std::size_t round = 1; round <= cfg.rounds; ++round) {
        auto forced = (round == 1) ? forced_round1 : std::nullopt;
        auto selected = sample_clients(cfg, round, forced);
        RoundRecord rec = run_round(global, model_spec, clients, selected, cfg, round);
        global = rec.global_after;
        result.history.push_back(std::move(rec));
        if (observer) observer(result.history.back());
    }

    result.final_global = std::move(global);
    return result;
}

EvalResult evaluate(const ModelParams& params, const nn::ConvNetSpec& spec,
                    const data::WindowedDataset& dataset) {
    dataset.validate();
    if (dataset.empty()) throw DataError("evaluate: empty dataset");

    const std::size_t n = dataset.size();
    const std::size_t chunk = 256;
    std::size_t correct = 0;
    double loss_sum = 0.0;

    for (std::size_t start = 0; start < n; start += chunk) {
        const std::size_t stop = std::min(start + chunk, n);
        std::vector<std::size_t> idx(stop - start);
        std::iota(idx.begin(), idx.end(), start);
        Tensor probs = nn::predict_proba(params, spec, dataset.gather(idx));
        const std::size_t K = probs.dim(1);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double* row = probs.data.data() + i * K;
            std::size_t best = 0;
            for (std::size_t k = 1; k < K; ++k) {
                if (row[k] > row[best]) best = k;
            }
            const int y = dataset.labels[idx[i]];
            if (static_cast<int>(best) == y) ++correct;
            loss_sum += -std::log(std::max(row[static_cast<std::size_t>(y)], 1e-300));
        }
    }
    return {static_cast<double>(correct) / static_cast<double>(n),
            loss_sum / static_cast<double>(n)};
}

void export_history(const std::filesystem::path& dir,
                    const std::vector<RoundRecord>& history) {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(dir / "manifest.jsonl");
    if (!manifest) throw IoError("cannot write manifest in " + dir.string());

    for (const auto& rec : history) {
        char tag[16];
        std::snprintf(tag, sizeof(tag), "%04zu", rec.round);
        const std::string global_file = std::string("round_") + tag + "_global.bin";
        save_params_file(rec.global_after, dir / global_file);

        nlohmann::ordered_json line;
        line["round"] = rec.round;
        line["selected"] = rec.selected;
        line["global"] = global_file;
        nlohmann::ordered_json uploads = nlohmann::ordered_json::object();
        for (const auto& [id, params] : rec.uploaded) {
            const std::string f =
                std::string("round_") + tag + "_client_" + std::to_string(id) + ".bin";
            save_params_file(params, dir / f);
            uploads[std::to_string(id)] = f;
        }
        line["uploads"] = uploads;
        manifest << line.dump() << "\n";
    }
}

}  // namespace fedhar::fed
