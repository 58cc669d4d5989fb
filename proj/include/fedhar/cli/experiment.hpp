#pragma once

#include <map>
#include <optional>

#include "fedhar/attack/attacker.hpp"
#include "fedhar/cli/config.hpp"
#include "fedhar/fed/federation.hpp"

namespace fedhar::cli {

// Per-client data after ingestion, splitting and (for csv corpora)
// train-split-only normalization.
struct PreparedData {
    std::map<int, data::WindowedDataset> train;
    std::map<int, data::WindowedDataset> test;
    std::map<int, data::WindowedDataset> scenario_pools;
    std::size_t channels = 0;
    std::size_t window_len = 0;
    std::size_t classes = 0;
    std::string corpus_name;
};

PreparedData prepare_corpus(const ExperimentConfig& cfg);

// The model spec an experiment trains: architecture from the config, input
// shape from the data, regularizers from the defense block.
nn::ConvNetSpec build_model_spec(const ExperimentConfig& cfg, const PreparedData& data);

struct RunOutputs {
    int target = 0;
    fed::EvalResult train_eval;
    fed::EvalResult test_eval;
    bool attack_trained = false;
    attack::AttackReport final_report;              // valid when attack_trained
    std::vector<attack::RoundAttackStat> attack_history;
    std::size_t rounds_executed = 0;
};

// Full experiment: federated training with the attacker observing, metric
// and report artifacts written under cfg.output_dir.
RunOutputs cmd_run(const ExperimentConfig& cfg, bool quiet = false);

// One round with the target forced into the selection; the attack trains on
// that single capture.
RunOutputs cmd_first_round_attack(const ExperimentConfig& cfg, bool quiet = false);

struct DistributionsOutputs {
    double median_own_top1 = 0.0;
    double median_other_top1 = 0.0;
    std::size_t rows_written = 0;
};

// Trains a model on the target client alone and emits per-window top-1
// sorted-softmax values for own vs other clients' held-out data.
DistributionsOutputs cmd_distributions(const ExperimentConfig& cfg, bool quiet = false);

// Writes the synthetic corpus as binary containers plus an index file.
void cmd_synth_gen(const ExperimentConfig& cfg, bool quiet = false);

}  // namespace fedhar::cli
