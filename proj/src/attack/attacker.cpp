#include "fedhar/attack/attacker.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "fedhar/errors.hpp"
#include "fedhar/rng.hpp"

namespace fedhar::attack {

std::vector<PredictionVector> extract_vectors(const ModelParams& model,
                                              const nn::ConvNetSpec& spec,
                                              const data::WindowedDataset& windows) {
    windows.validate();
    const std::size_t n = windows.size();
    std::vector<PredictionVector> out(n);

    const std::size_t chunk = 256;
    for (std::size_t start = 0; start < n; start += chunk) {
        const std::size_t stop = std::min(start + chunk, n);
        std::vector<std::size_t> idx(stop - start);
        std::iota(idx.begin(), idx.end(), start);
        Tensor probs = nn::predict_proba(model, spec, windows.gather(idx));
        const std::size_t K = probs.dim(1);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            auto& v = out[idx[i]].probs;
            v.assign(probs.data.data() + i * K, probs.data.data() + (i + 1) * K);
            std::sort(v.begin(), v.end(), std::greater<double>());
        }
    }
    return out;
}

namespace {

void append_rows(AttackTrainSet& set, const std::vector<PredictionVector>& vectors,
                 int label, std::size_t round) {
    for (const auto& v : vectors) {
        set.features.push_back(v.probs);
        set.labels.push_back(label);
        set.provenance.push_back({round, label == 1});
    }
}

}  // namespace

AttackTrainSet build_attack_set(
    const std::vector<std::pair<std::size_t, const ModelParams*>>& captured,
    const AttackScenario& scenario, const nn::ConvNetSpec& spec) {
    if (captured.empty()) throw ConfigError("build_attack_set: no captured models");
    if (scenario.member_pool.empty() || scenario.nonmember_pool.empty()) {
        throw ConfigError("build_attack_set: empty pools");
    }
    AttackTrainSet set;
    for (const auto& [round, model] : captured) {
        append_rows(set, extract_vectors(*model, spec, scenario.member_pool), 1, round);
        append_rows(set, extract_vectors(*model, spec, scenario.nonmember_pool), 0, round);
    }
    return set;
}

ServerAttacker::ServerAttacker(AttackScenario scenario, nn::ConvNetSpec spec,
                               gbdt::GbdtConfig attack_cfg)
    : scenario_(std::move(scenario)), spec_(std::move(spec)), attack_cfg_(attack_cfg) {
    scenario_.validate();
    attack_cfg_.validate();
}

void ServerAttacker::on_round(const fed::RoundRecord& record) {
    const bool has_target = std::find(record.selected.begin(), record.selected.end(),
                                      scenario_.target) != record.selected.end();
    if (has_target) {
        const ModelParams& capture = record.uploaded.at(scenario_.target);
        append_rows(train_set_, extract_vectors(capture, spec_, scenario_.member_pool), 1,
                    record.round);
        append_rows(train_set_, extract_vectors(capture, spec_, scenario_.nonmember_pool), 0,
                    record.round);
        captured_rounds_.push_back(record.round);
        latest_capture_ = capture;

        // Retrain from scratch on the accumulated rows; the accumulation is
        // where the cross-round information lives.
        gbdt::GbdtConfig cfg = attack_cfg_;
        cfg.rng_seed = derive_seed(attack_cfg_.rng_seed, "attack-train", record.round);
        model_ = gbdt::train(train_set_.features, train_set_.labels, cfg);
    }

    RoundAttackStat stat;
    stat.round = record.round;
    stat.captured = has_target;
    stat.attack_set_size = train_set_.size();
    if (model_) {
        AttackReport rep = classify_mix();
        stat.accuracy = rep.accuracy;
        stat.recall = rep.recall;
    }
    history_.push_back(stat);
}

AttackReport ServerAttacker::classify_mix() const {
    if (!model_ || !latest_capture_) {
        throw StateError("classify_mix: attack model has not been trained yet");
    }
    auto vectors = extract_vectors(*latest_capture_, spec_, scenario_.mix);
    std::vector<int> predicted(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        predicted[i] = model_->predict_label(vectors[i].probs);
    }
    return score_mix_predictions(scenario_.mix_truth, predicted);
}

AttackReport ServerAttacker::confidence_baseline(double threshold) const {
    if (!latest_capture_) {
        throw StateError("confidence_baseline: no captured model yet");
    }
    auto vectors = extract_vectors(*latest_capture_, spec_, scenario_.mix);
    std::vector<int> predicted(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        predicted[i] = vectors[i].probs.front() >= threshold ? 1 : 0;
    }
    return score_mix_predictions(scenario_.mix_truth, predicted);
}

}  // namespace fedhar::attack
