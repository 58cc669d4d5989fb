#include "fedhar/cli/config.hpp"

#include <cmath>
#include <fstream>

#include "fedhar/errors.hpp"

namespace fedhar::cli {

namespace {

// Thin cursor over a json document that keeps the dotted path for messages.
class Reader {
public:
    Reader(const nlohmann::json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    bool has(const char* key) const { return j_->contains(key); }

    Reader at(const char* key) const {
        if (!j_->contains(key)) throw ConfigError("config: missing field " + join(key));
        return Reader(j_->at(key), join(key));
    }

    template <typename T>
    T get(const char* key) const {
        if (!j_->contains(key)) throw ConfigError("config: missing field " + join(key));
        return read<T>(j_->at(key), join(key));
    }

    template <typename T>
    T get_or(const char* key, T fallback) const {
        if (!j_->contains(key)) return fallback;
        return read<T>(j_->at(key), join(key));
    }

    const nlohmann::json& raw() const { return *j_; }
    const std::string& path() const { return path_; }

private:
    std::string join(const char* key) const {
        return path_.empty() ? std::string(key) : path_ + "." + key;
    }

    template <typename T>
    static T read(const nlohmann::json& v, const std::string& where) {
        try {
            return v.get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError("config: field " + where + " has the wrong type");
        }
    }

    const nlohmann::json* j_;
    std::string path_;
};

std::vector<nn::ConvBlock> parse_blocks(const Reader& r) {
    std::vector<nn::ConvBlock> blocks;
    const auto& arr = r.raw();
    if (!arr.is_array() || arr.empty()) {
        throw ConfigError("config: " + r.path() + " must be a nonempty array");
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
        Reader b(arr[i], r.path() + "[" + std::to_string(i) + "]");
        nn::ConvBlock blk;
        blk.filters = b.get<std::size_t>("filters");
        blk.kernel = b.get<std::size_t>("kernel");
        blk.pool = b.get_or<std::size_t>("pool", 1);
        blocks.push_back(blk);
    }
    return blocks;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("config: train_fraction must be in (0,1)");
    }
    if (rounds < 1) throw ConfigError("config: federated.rounds must be >= 1");
    train.validate();
    attack.validate();
    if (scenario.k < 2) throw ConfigError("config: scenario.k must be >= 2");
    if (defenses.l2_enabled && defenses.l2_lambda < 0) {
        throw ConfigError("config: defenses.l2.lambda must be >= 0");
    }
    if (defenses.dropout_enabled &&
        !(defenses.dropout_rate >= 0.0 && defenses.dropout_rate < 1.0)) {
        throw ConfigError("config: defenses.dropout.rate must be in [0,1)");
    }
    if (corpus_kind == CorpusKind::kSynthetic) {
        synthetic.spec.validate();
    } else {
        if (csv.spec_file.empty()) throw ConfigError("config: corpus.spec_file required");
        if (csv.data_path.empty()) throw ConfigError("config: corpus.path required");
    }
    if (prox_mu < 0.0) throw ConfigError("config: federated.train.prox_mu must be >= 0");
    if (distributions_epochs < 1) {
        throw ConfigError("config: distributions.epochs must be >= 1");
    }
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
    Reader root(j, "");
    ExperimentConfig cfg;

    cfg.master_seed = root.get_or<std::uint64_t>("master_seed", 0);
    cfg.output_dir = root.get_or<std::string>("output_dir", "out");
    cfg.train_fraction = root.get_or<double>("train_fraction", 0.8);

    Reader corpus = root.at("corpus");
    const auto kind = corpus.get<std::string>("type");
    if (kind == "synthetic") {
        cfg.corpus_kind = CorpusKind::kSynthetic;
        Reader syn = corpus.at("synthetic");
        auto& spec = cfg.synthetic.spec;
        spec.n_clients = syn.get_or<std::size_t>("n_clients", 5);
        spec.classes = syn.get_or<std::size_t>("classes", 6);
        spec.channels = syn.get_or<std::size_t>("channels", 3);
        spec.window_len = syn.get_or<std::size_t>("window_len", 64);
        spec.windows_per_class = syn.get_or<std::size_t>("windows_per_class", 100);
        const auto mode = syn.get_or<std::string>("mode", "heterogeneous");
        if (mode == "heterogeneous") {
            cfg.synthetic.heterogeneous = true;
        } else if (mode == "iid") {
            cfg.synthetic.heterogeneous = false;
        } else {
            throw ConfigError("config: corpus.synthetic.mode must be"
                              " 'heterogeneous' or 'iid'");
        }
        if (syn.has("signatures")) {
            const auto& arr = syn.at("signatures").raw();
            for (std::size_t i = 0; i < arr.size(); ++i) {
                Reader s(arr[i], "corpus.synthetic.signatures[" + std::to_string(i) + "]");
                data::ClientSignature sig;
                sig.amplitude_scale = s.get_or<double>("amplitude_scale", 1.0);
                sig.frequency_offset = s.get_or<double>("frequency_offset", 0.0);
                sig.baseline_shift = s.get_or<double>("baseline_shift", 0.0);
                sig.noise_sigma = s.get_or<double>("noise_sigma", 0.25);
                spec.signatures.push_back(sig);
            }
        } else {
            spec.signatures = cfg.synthetic.heterogeneous
                                  ? data::heterogeneous_signatures(spec.n_clients)
                                  : data::iid_signatures(spec.n_clients);
        }
    } else if (kind == "csv") {
        cfg.corpus_kind = CorpusKind::kCsv;
        cfg.csv.spec_file = corpus.get<std::string>("spec_file");
        cfg.csv.data_path = corpus.get<std::string>("path");
    } else {
        throw ConfigError("config: corpus.type must be 'synthetic' or 'csv'");
    }

    if (root.has("model")) {
        Reader model = root.at("model");
        if (model.has("conv_blocks")) cfg.conv_blocks = parse_blocks(model.at("conv_blocks"));
        cfg.dense_hidden = model.get_or<std::size_t>("dense_hidden", 64);
    }

    if (root.has("federated")) {
        Reader federated = root.at("federated");
        cfg.rounds = federated.get_or<std::size_t>("rounds", 20);
        if (federated.has("sample_size")) {
            cfg.sample_size = federated.get<std::size_t>("sample_size");
        }
        const auto algo = federated.get_or<std::string>("algorithm", "fedavg");
        if (algo == "fedavg") cfg.algorithm = fed::Algorithm::kFedAvg;
        else if (algo == "fedprox") cfg.algorithm = fed::Algorithm::kFedProx;
        else throw ConfigError("config: federated.algorithm must be 'fedavg' or 'fedprox'");
        if (federated.has("train")) {
            Reader train = federated.at("train");
            cfg.train.learning_rate = train.get_or<double>("learning_rate", 0.05);
            cfg.train.local_epochs = train.get_or<std::size_t>("local_epochs", 1);
            cfg.train.batch_size = train.get_or<std::size_t>("batch_size", 32);
            cfg.prox_mu = train.get_or<double>("prox_mu", 0.01);
        }
    }

    if (root.has("scenario")) {
        Reader scen = root.at("scenario");
        if (scen.has("target")) {
            const auto& t = scen.at("target").raw();
            if (t.is_string()) {
                if (t.get<std::string>() != "random") {
                    throw ConfigError("config: scenario.target must be an id or 'random'");
                }
            } else {
                cfg.scenario.target = scen.get<int>("target");
            }
        }
        cfg.scenario.k = scen.get_or<std::size_t>("k", 2);
        cfg.scenario.n_member = scen.get_or<std::size_t>("n_member", 200);
        cfg.scenario.n_nonmember = scen.get_or<std::size_t>("n_nonmember", 200);
        cfg.scenario.mix_members = scen.get_or<std::size_t>("mix_members", 200);
        cfg.scenario.member_from_train = scen.get_or<bool>("member_from_train", true);
    }

    if (root.has("defenses")) {
        Reader def = root.at("defenses");
        if (def.has("l2")) {
            Reader l2 = def.at("l2");
            cfg.defenses.l2_enabled = l2.get_or<bool>("enabled", false);
            cfg.defenses.l2_lambda = l2.get_or<double>("lambda", 1e-3);
        }
        if (def.has("dropout")) {
            Reader dr = def.at("dropout");
            cfg.defenses.dropout_enabled = dr.get_or<bool>("enabled", false);
            cfg.defenses.dropout_rate = dr.get_or<double>("rate", 0.5);
        }
    }

    if (root.has("attack")) {
        Reader atk = root.at("attack");
        cfg.attack.n_trees = atk.get_or<std::size_t>("n_trees", 100);
        cfg.attack.max_depth = atk.get_or<std::size_t>("max_depth", 3);
        cfg.attack.learning_rate = atk.get_or<double>("learning_rate", 0.1);
        cfg.attack.min_samples_leaf = atk.get_or<std::size_t>("min_samples_leaf", 5);
        cfg.attack.subsample = atk.get_or<double>("subsample", 1.0);
    }

    if (root.has("distributions")) {
        cfg.distributions_epochs = root.at("distributions").get_or<std::size_t>("epochs", 5);
    }
    cfg.save_round_models = root.get_or<bool>("save_round_models", false);

    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return parse_experiment_config(j);
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
    nlohmann::ordered_json j;
    j["master_seed"] = master_seed;
    j["output_dir"] = output_dir.string();
    j["train_fraction"] = train_fraction;

    nlohmann::ordered_json corpus;
    if (corpus_kind == CorpusKind::kSynthetic) {
        corpus["type"] = "synthetic";
        nlohmann::ordered_json syn;
        const auto& spec = synthetic.spec;
        syn["n_clients"] = spec.n_clients;
        syn["classes"] = spec.classes;
        syn["channels"] = spec.channels;
        syn["window_len"] = spec.window_len;
        syn["windows_per_class"] = spec.windows_per_class;
        syn["mode"] = synthetic.heterogeneous ? "heterogeneous" : "iid";
        nlohmann::ordered_json sigs = nlohmann::ordered_json::array();
        for (const auto& s : spec.signatures) {
            sigs.push_back({{"amplitude_scale", s.amplitude_scale},
                            {"frequency_offset", s.frequency_offset},
                            {"baseline_shift", s.baseline_shift},
                            {"noise_sigma", s.noise_sigma}});
        }
        syn["signatures"] = sigs;
        corpus["synthetic"] = syn;
    } else {
        corpus["type"] = "csv";
        corpus["spec_file"] = csv.spec_file.string();
        corpus["path"] = csv.data_path.string();
    }
    j["corpus"] = corpus;

    nlohmann::ordered_json model;
    nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
    for (const auto& b : conv_blocks) {
        blocks.push_back({{"filters", b.filters}, {"kernel", b.kernel}, {"pool", b.pool}});
    }
    model["conv_blocks"] = blocks;
    model["dense_hidden"] = dense_hidden;
    j["model"] = model;

    nlohmann::ordered_json federated;
    federated["rounds"] = rounds;
    if (sample_size) federated["sample_size"] = *sample_size;
    federated["algorithm"] = algorithm == fed::Algorithm::kFedAvg ? "fedavg" : "fedprox";
    federated["train"] = {{"learning_rate", train.learning_rate},
                          {"local_epochs", train.local_epochs},
                          {"batch_size", train.batch_size},
                          {"prox_mu", prox_mu}};
    j["federated"] = federated;

    nlohmann::ordered_json scen;
    if (scenario.target) scen["target"] = *scenario.target;
    else scen["target"] = "random";
    scen["k"] = scenario.k;
    scen["n_member"] = scenario.n_member;
    scen["n_nonmember"] = scenario.n_nonmember;
    scen["mix_members"] = scenario.mix_members;
    scen["member_from_train"] = scenario.member_from_train;
    j["scenario"] = scen;

    j["defenses"] = {{"l2", {{"enabled", defenses.l2_enabled},
                             {"lambda", defenses.l2_lambda}}},
                     {"dropout", {{"enabled", defenses.dropout_enabled},
                                  {"rate", defenses.dropout_rate}}}};

    j["attack"] = {{"n_trees", attack.n_trees},
                   {"max_depth", attack.max_depth},
                   {"learning_rate", attack.learning_rate},
                   {"min_samples_leaf", attack.min_samples_leaf},
                   {"subsample", attack.subsample}};

    j["distributions"] = {{"epochs", distributions_epochs}};
    j["save_round_models"] = save_round_models;
    return j;
}

}  // namespace fedhar::cli
