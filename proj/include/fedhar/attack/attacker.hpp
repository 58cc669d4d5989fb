#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fedhar/attack/scenario.hpp"
#include "fedhar/fed/federation.hpp"
#include "fedhar/gbdt/gbdt.hpp"
#include "fedhar/model_params.hpp"
#include "fedhar/nn/convnet.hpp"

namespace fedhar::attack {

// Descending-sorted softmax row of a captured model on one window. Sorting
// discards class identity, leaving only the confidence profile.
struct PredictionVector {
    std::vector<double> probs;
};

// One prediction vector per window, sorted descending within each row.
std::vector<PredictionVector> extract_vectors(const ModelParams& model,
                                              const nn::ConvNetSpec& spec,
                                              const data::WindowedDataset& windows);

struct RowProvenance {
    std::size_t round = 0;
    bool from_member_pool = false;
};

// Labeled prediction vectors accumulated across captures: member-pool rows
// are labeled 1, nonmember-pool rows 0.
struct AttackTrainSet {
    std::vector<std::vector<double>> features;
    std::vector<int> labels;
    std::vector<RowProvenance> provenance;

    std::size_t size() const { return labels.size(); }
};

// Builds the full training set for a list of captured (round, model) pairs.
AttackTrainSet build_attack_set(
    const std::vector<std::pair<std::size_t, const ModelParams*>>& captured,
    const AttackScenario& scenario, const nn::ConvNetSpec& spec);

// Per-round attack bookkeeping for reporting.
struct RoundAttackStat {
    std::size_t round = 0;
    bool captured = false;
    std::size_t attack_set_size = 0;
    std::optional<double> accuracy;
    std::optional<double> recall;
};

// The curious server. Hooks into run_training: whenever the target uploads,
// it captures the model, extends the attack set, retrains the classifier
// from scratch on the accumulated rows, and rescores the mix pool.
class ServerAttacker {
public:
    ServerAttacker(AttackScenario scenario, nn::ConvNetSpec spec, gbdt::GbdtConfig attack_cfg);

    void on_round(const fed::RoundRecord& record);

    bool trained() const { return model_.has_value(); }
    std::size_t capture_count() const { return captured_rounds_.size(); }
    const AttackTrainSet& training_set() const { return train_set_; }
    const std::vector<RoundAttackStat>& history() const { return history_; }
    const AttackScenario& scenario() const { return scenario_; }

    // Classifies every mix window through the latest captured target model.
    // StateError until at least one capture happened.
    AttackReport classify_mix() const;

    // No-learning baseline: member iff top-1 sorted probability >= threshold.
    AttackReport confidence_baseline(double threshold) const;

private:
    AttackScenario scenario_;
    nn::ConvNetSpec spec_;
    gbdt::GbdtConfig attack_cfg_;
    AttackTrainSet train_set_;
    std::vector<std::size_t> captured_rounds_;
    std::optional<ModelParams> latest_capture_;
    std::optional<gbdt::GbdtModel> model_;
    std::vector<RoundAttackStat> history_;
};

}  // namespace fedhar::attack
