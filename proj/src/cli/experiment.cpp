#include "fedhar/cli/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "fedhar/data/scenario_builder.hpp"
#include "fedhar/errors.hpp"
#include "fedhar/rng.hpp"

namespace fedhar::cli {

namespace {

constexpr int kFormatVersion = 1;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::ofstream open_artifact(const std::filesystem::path& dir, const char* name) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / name);
    if (!os) throw IoError("cannot write " + (dir / name).string());
    return os;
}

int resolve_target(const ExperimentConfig& cfg, const PreparedData& data) {
    if (cfg.scenario.target) {
        if (!data.train.count(*cfg.scenario.target)) {
            throw ConfigError("config: scenario.target " +
                              std::to_string(*cfg.scenario.target) + " is not a client id");
        }
        return *cfg.scenario.target;
    }
    Rng rng(derive_seed(cfg.master_seed, "target-choice"));
    auto it = data.train.begin();
    std::advance(it, static_cast<std::ptrdiff_t>(rng.index(data.train.size())));
    return it->first;
}

fed::FederatedConfig build_fed_config(const ExperimentConfig& cfg, std::size_t n_clients,
                                      std::size_t rounds) {
    fed::FederatedConfig fc;
    fc.n_clients = n_clients;
    fc.rounds = rounds;
    fc.sample_size = cfg.sample_size.value_or(std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(0.3 * static_cast<double>(n_clients)))));
    fc.algorithm = cfg.algorithm;
    fc.train_cfg = cfg.train;
    fc.train_cfg.prox_mu = cfg.algorithm == fed::Algorithm::kFedProx ? cfg.prox_mu : 0.0;
    fc.train_cfg.rng_seed = derive_seed(cfg.master_seed, "train");
    fc.sampling_seed = derive_seed(cfg.master_seed, "sampling");
    return fc;
}

gbdt::GbdtConfig build_attack_config(const ExperimentConfig& cfg) {
    gbdt::GbdtConfig ac = cfg.attack;
    ac.rng_seed = derive_seed(cfg.master_seed, "attack");
    return ac;
}

nlohmann::ordered_json resolved_config_json(const ExperimentConfig& cfg, const char* command,
                                            int target, std::size_t rounds_effective,
                                            std::size_t sample_size) {
    nlohmann::ordered_json j;
    j["format_version"] = kFormatVersion;
    j["command"] = command;
    j["resolved_target"] = target;
    j["rounds_effective"] = rounds_effective;
    j["sample_size_effective"] = sample_size;
    j["config"] = cfg.to_json();
    return j;
}

void write_summary(const ExperimentConfig& cfg, const PreparedData& data,
                   const RunOutputs& out, const char* command) {
    nlohmann::ordered_json j;
    j["format_version"] = kFormatVersion;
    j["command"] = command;
    j["dataset"] = data.corpus_name;
    j["model"] = "conv" + std::to_string(cfg.conv_blocks.size());
    j["algorithm"] = cfg.algorithm == fed::Algorithm::kFedAvg ? "fedavg" : "fedprox";
    j["k"] = cfg.scenario.k;
    j["target"] = out.target;
    j["rounds"] = out.rounds_executed;
    j["defense_l2"] = cfg.defenses.l2_enabled;
    j["defense_l2_lambda"] = cfg.defenses.l2_enabled ? cfg.defenses.l2_lambda : 0.0;
    j["defense_dropout"] = cfg.defenses.dropout_enabled;
    j["defense_dropout_rate"] = cfg.defenses.dropout_enabled ? cfg.defenses.dropout_rate : 0.0;
    j["har_train_accuracy"] = out.train_eval.accuracy;
    j["har_test_accuracy"] = out.test_eval.accuracy;
    j["har_train_loss"] = out.train_eval.mean_loss;
    j["har_test_loss"] = out.test_eval.mean_loss;
    if (out.attack_trained) {
        j["attack"] = {{"accuracy", out.final_report.accuracy},
                       {"recall", out.final_report.recall},
                       {"tp", out.final_report.tp},
                       {"fp", out.final_report.fp},
                       {"tn", out.final_report.tn},
                       {"fn", out.final_report.fn}};
    } else {
        j["attack"] = nullptr;
    }
    auto js = open_artifact(cfg.output_dir, "summary.json");
    js << j.dump(2) << "\n";

    // One flat row mirroring the paper-style table columns.
    auto tsv = open_artifact(cfg.output_dir, "summary.tsv");
    tsv << "dataset\tmodel\talgorithm\tk\tl2\tdropout\trounds\t"
           "train_accuracy\ttest_accuracy\tattack_accuracy\tattack_recall\n";
    tsv << data.corpus_name << "\tconv" << cfg.conv_blocks.size() << "\t"
        << (cfg.algorithm == fed::Algorithm::kFedAvg ? "fedavg" : "fedprox") << "\t"
        << cfg.scenario.k << "\t" << (cfg.defenses.l2_enabled ? "on" : "off") << "\t"
        << (cfg.defenses.dropout_enabled ? "on" : "off") << "\t" << out.rounds_executed
        << "\t" << fmt(out.train_eval.accuracy) << "\t" << fmt(out.test_eval.accuracy) << "\t"
        << (out.attack_trained ? fmt(out.final_report.accuracy) : "n/a") << "\t"
        << (out.attack_trained ? fmt(out.final_report.recall) : "n/a") << "\n";
}

RunOutputs run_pipeline(const ExperimentConfig& cfg, const char* command,
                        std::size_t rounds, bool force_target_round1, bool quiet) {
    PreparedData data = prepare_corpus(cfg);
    const nn::ConvNetSpec spec = build_model_spec(cfg, data);
    const int target = resolve_target(cfg, data);

    const fed::FederatedConfig fed_cfg = build_fed_config(cfg, data.train.size(), rounds);

    auto scenario = data::build_scenario(
        data.scenario_pools, target, cfg.scenario.k,
        {cfg.scenario.n_member, cfg.scenario.n_nonmember, cfg.scenario.mix_members},
        derive_seed(cfg.master_seed, "scenario"));

    attack::ServerAttacker attacker(std::move(scenario), spec, build_attack_config(cfg));

    {
        auto rc = open_artifact(cfg.output_dir, "resolved_config.json");
        rc << resolved_config_json(cfg, command, target, rounds, fed_cfg.sample_size).dump(2)
           << "\n";
    }

    // Pooled train/test sets for the benign HAR metrics.
    std::vector<const data::WindowedDataset*> train_parts, test_parts;
    for (const auto& [_, ds] : data.train) train_parts.push_back(&ds);
    for (const auto& [_, ds] : data.test) test_parts.push_back(&ds);
    const data::WindowedDataset pooled_train = data::WindowedDataset::concat(train_parts);
    const data::WindowedDataset pooled_test = data::WindowedDataset::concat(test_parts);

    auto metrics = open_artifact(cfg.output_dir, "training_metrics.jsonl");

    fed::RoundObserver observer = [&](const fed::RoundRecord& rec) {
        attacker.on_round(rec);
        const fed::EvalResult tr = fed::evaluate(rec.global_after, spec, pooled_train);
        const fed::EvalResult te = fed::evaluate(rec.global_after, spec, pooled_test);
        nlohmann::ordered_json line;
        line["round"] = rec.round;
        line["selected"] = rec.selected;
        line["train_accuracy"] = tr.accuracy;
        line["train_loss"] = tr.mean_loss;
        line["test_accuracy"] = te.accuracy;
        line["test_loss"] = te.mean_loss;
        metrics << line.dump() << "\n";
        if (!quiet) {
            std::cout << "round " << rec.round << "/" << rounds
                      << " train_acc=" << fmt(tr.accuracy)
                      << " test_acc=" << fmt(te.accuracy) << std::endl;
        }
    };

    ModelParams initial = nn::init_params(spec, derive_seed(cfg.master_seed, "init"));
    fed::TrainingResult result =
        fed::run_training(fed_cfg, data.train, spec, std::move(initial), observer,
                          force_target_round1 ? std::optional<int>(target) : std::nullopt);

    if (cfg.save_round_models) {
        fed::export_history(cfg.output_dir / "models", result.history);
    }

    RunOutputs out;
    out.target = target;
    out.rounds_executed = result.history.size();
    out.train_eval = fed::evaluate(result.final_global, spec, pooled_train);
    out.test_eval = fed::evaluate(result.final_global, spec, pooled_test);
    out.attack_history = attacker.history();
    out.attack_trained = attacker.trained();
    if (out.attack_trained) out.final_report = attacker.classify_mix();

    {
        auto hist = open_artifact(cfg.output_dir, "attack_history.jsonl");
        for (const auto& stat : out.attack_history) {
            nlohmann::ordered_json line;
            line["round"] = stat.round;
            line["captured"] = stat.captured;
            line["attack_set_size"] = stat.attack_set_size;
            if (stat.accuracy) line["accuracy"] = *stat.accuracy;
            else line["accuracy"] = nullptr;
            if (stat.recall) line["recall"] = *stat.recall;
            else line["recall"] = nullptr;
            hist << line.dump() << "\n";
        }
    }

    write_summary(cfg, data, out, command);

    if (!quiet && out.attack_trained) {
        std::cout << "attack accuracy=" << fmt(out.final_report.accuracy)
                  << " recall=" << fmt(out.final_report.recall) << std::endl;
    }
    return out;
}

}  // namespace

PreparedData prepare_corpus(const ExperimentConfig& cfg) {
    PreparedData out;
    std::map<int, data::WindowedDataset> full;
    bool zscore = false;

    if (cfg.corpus_kind == CorpusKind::kSynthetic) {
        data::SynthSpec spec = cfg.synthetic.spec;
        spec.rng_seed = derive_seed(cfg.master_seed, "corpus");
        full = data::generate_synthetic(spec);
        out.classes = spec.classes;
        out.corpus_name =
            cfg.synthetic.heterogeneous ? "synthetic-heterogeneous" : "synthetic-iid";
    } else {
        const data::CorpusSpec spec = data::corpus_spec_from_json_file(cfg.csv.spec_file);
        data::CorpusLoad load = data::load_corpus(spec, cfg.csv.data_path);
        full = std::move(load.clients);
        out.classes = spec.n_classes();
        out.corpus_name = spec.name;
        zscore = spec.normalization == data::Normalization::kZScore;
    }

    for (auto& [id, ds] : full) {
        auto [train, test] =
            data::split(ds, cfg.train_fraction,
                        derive_seed(cfg.master_seed, "split", static_cast<std::uint64_t>(id)));
        if (zscore) {
            // Statistics come from this client's training split alone.
            const data::ChannelStats stats = data::compute_channel_stats(train);
            data::apply_zscore(train, stats);
            data::apply_zscore(test, stats);
        }
        out.train.emplace(id, std::move(train));
        out.test.emplace(id, std::move(test));
    }

    if (out.train.empty()) throw DataError("prepare_corpus: no clients");
    const auto& first = out.train.begin()->second;
    out.channels = first.channels();
    out.window_len = first.window_len();

    // Scenario pools default to the training splits; the flag widens them to
    // train + test, mirroring "no requirement regarding their participation".
    if (cfg.scenario.member_from_train) {
        out.scenario_pools = out.train;
    } else {
        for (const auto& [id, train] : out.train) {
            out.scenario_pools.emplace(
                id, data::WindowedDataset::concat({&train, &out.test.at(id)}));
        }
    }
    return out;
}

nn::ConvNetSpec build_model_spec(const ExperimentConfig& cfg, const PreparedData& data) {
    nn::ConvNetSpec spec;
    spec.in_channels = data.channels;
    spec.window_len = data.window_len;
    spec.classes = data.classes;
    spec.conv_blocks = cfg.conv_blocks;
    spec.dense_hidden = cfg.dense_hidden;
    spec.dropout_rate = cfg.defenses.dropout_enabled ? cfg.defenses.dropout_rate : 0.0;
    spec.l2_lambda = cfg.defenses.l2_enabled ? cfg.defenses.l2_lambda : 0.0;
    spec.validate();
    return spec;
}

RunOutputs cmd_run(const ExperimentConfig& cfg, bool quiet) {
    cfg.validate();
    return run_pipeline(cfg, "run", cfg.rounds, true, quiet);
}

RunOutputs cmd_first_round_attack(const ExperimentConfig& cfg, bool quiet) {
    cfg.validate();
    return run_pipeline(cfg, "first-round-attack", 1, true, quiet);
}

DistributionsOutputs cmd_distributions(const ExperimentConfig& cfg, bool quiet) {
    cfg.validate();
    PreparedData data = prepare_corpus(cfg);
    const nn::ConvNetSpec spec = build_model_spec(cfg, data);
    const int target = resolve_target(cfg, data);

    {
        auto rc = open_artifact(cfg.output_dir, "resolved_config.json");
        rc << resolved_config_json(cfg, "distributions", target, cfg.distributions_epochs, 0)
                  .dump(2)
           << "\n";
    }

    // Solo model: the target client trains alone for a few epochs.
    nn::TrainConfig train_cfg = cfg.train;
    train_cfg.prox_mu = 0.0;
    train_cfg.local_epochs = cfg.distributions_epochs;
    train_cfg.rng_seed = derive_seed(cfg.master_seed, "distributions-train");
    ModelParams solo = nn::local_train(
        nn::init_params(spec, derive_seed(cfg.master_seed, "init")), spec,
        data.train.at(target), train_cfg);

    auto top1_of = [&](const data::WindowedDataset& ds, std::vector<double>& sink) {
        for (const auto& v : attack::extract_vectors(solo, spec, ds)) {
            sink.push_back(v.probs.front());
        }
    };

    std::vector<double> own, other;
    top1_of(data.test.at(target), own);
    for (const auto& [id, ds] : data.test) {
        if (id != target) top1_of(ds, other);
    }

    auto tsv = open_artifact(cfg.output_dir, "distributions.tsv");
    tsv << "source\ttop1\n";
    for (double v : own) tsv << "own\t" << fmt(v) << "\n";
    for (double v : other) tsv << "other\t" << fmt(v) << "\n";

    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n == 0 ? 0.0 : (n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]));
    };

    DistributionsOutputs out;
    out.median_own_top1 = median(own);
    out.median_other_top1 = median(other);
    out.rows_written = own.size() + other.size();

    nlohmann::ordered_json j;
    j["format_version"] = kFormatVersion;
    j["command"] = "distributions";
    j["dataset"] = data.corpus_name;
    j["target"] = target;
    j["median_own_top1"] = out.median_own_top1;
    j["median_other_top1"] = out.median_other_top1;
    j["own_rows"] = own.size();
    j["other_rows"] = other.size();
    auto js = open_artifact(cfg.output_dir, "summary.json");
    js << j.dump(2) << "\n";

    if (!quiet) {
        std::cout << "median own top1=" << fmt(out.median_own_top1)
                  << " other top1=" << fmt(out.median_other_top1) << std::endl;
    }
    return out;
}

void cmd_synth_gen(const ExperimentConfig& cfg, bool quiet) {
    cfg.validate();
    if (cfg.corpus_kind != CorpusKind::kSynthetic) {
        throw ConfigError("synth-gen requires a synthetic corpus config");
    }
    data::SynthSpec spec = cfg.synthetic.spec;
    spec.rng_seed = derive_seed(cfg.master_seed, "corpus");
    auto corpus = data::generate_synthetic(spec);

    std::filesystem::create_directories(cfg.output_dir);
    nlohmann::ordered_json index;
    index["format_version"] = kFormatVersion;
    index["n_clients"] = spec.n_clients;
    index["classes"] = spec.classes;
    index["channels"] = spec.channels;
    index["window_len"] = spec.window_len;
    nlohmann::ordered_json files = nlohmann::ordered_json::object();
    for (const auto& [id, ds] : corpus) {
        char name[32];
        std::snprintf(name, sizeof(name), "client_%03d.bin", id);
        data::save_dataset_file(ds, cfg.output_dir / name);
        files[std::to_string(id)] = name;
    }
    index["files"] = files;
    auto os = open_artifact(cfg.output_dir, "index.json");
    os << index.dump(2) << "\n";
    if (!quiet) {
        std::cout << "wrote " << corpus.size() << " client datasets to "
                  << cfg.output_dir.string() << std::endl;
    }
}

}  // namespace fedhar::cli
