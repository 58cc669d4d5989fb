#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "fedhar/data/corpus.hpp"
#include "fedhar/data/synthetic.hpp"
#include "fedhar/fed/federation.hpp"
#include "fedhar/gbdt/gbdt.hpp"
#include "fedhar/nn/convnet.hpp"

namespace fedhar::cli {

enum class CorpusKind { kSynthetic, kCsv };

struct SyntheticCorpusConfig {
    data::SynthSpec spec;        // signatures filled from mode unless explicit
    bool heterogeneous = true;
};

struct CsvCorpusConfig {
    std::filesystem::path spec_file;
    std::filesystem::path data_path;
};

struct DefenseConfig {
    bool l2_enabled = false;
    double l2_lambda = 1e-3;
    bool dropout_enabled = false;
    double dropout_rate = 0.5;
};

struct ScenarioConfig {
    std::optional<int> target;  // nullopt = choose uniformly at random
    std::size_t k = 2;
    std::size_t n_member = 200;
    std::size_t n_nonmember = 200;
    std::size_t mix_members = 200;
    bool member_from_train = true;
};

// One experiment, fully specified. master_seed derives every sub-seed, so a
// config + seed pair pins all artifacts byte for byte.
struct ExperimentConfig {
    std::uint64_t master_seed = 0;
    std::filesystem::path output_dir = "out";

    CorpusKind corpus_kind = CorpusKind::kSynthetic;
    SyntheticCorpusConfig synthetic;
    CsvCorpusConfig csv;

    double train_fraction = 0.8;

    std::vector<nn::ConvBlock> conv_blocks = {{32, 5, 2}, {64, 5, 2}};
    std::size_t dense_hidden = 64;

    std::size_t rounds = 20;
    std::optional<std::size_t> sample_size;  // default: max(1, ceil(0.3 n))
    fed::Algorithm algorithm = fed::Algorithm::kFedAvg;
    nn::TrainConfig train;  // rng_seed filled from master_seed
    double prox_mu = 0.01;  // used when algorithm == fedprox

    ScenarioConfig scenario;
    DefenseConfig defenses;
    gbdt::GbdtConfig attack;

    std::size_t distributions_epochs = 5;
    bool save_round_models = false;

    void validate() const;  // ConfigError with a field path on failure

    // The fully materialized document written next to the artifacts.
    nlohmann::ordered_json to_json() const;
};

// Parses and validates; errors carry the offending field path.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace fedhar::cli
