// Experiment driver for the federated HAR membership-leak simulator.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fedhar/cli/experiment.hpp"
#include "fedhar/errors.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed_override, "override master_seed");
    cmd->add_option("--out", args.out_override, "override output directory");
    cmd->add_flag("--quiet", args.quiet, "suppress progress output");
}

fedhar::cli::ExperimentConfig load(const CommonArgs& args) {
    auto cfg = fedhar::cli::load_experiment_config(args.config_path);
    if (args.seed_override) cfg.master_seed = *args.seed_override;
    if (args.out_override) cfg.output_dir = *args.out_override;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"federated HAR training with a curious-server membership attack"};
    app.require_subcommand(1);

    CommonArgs run_args, first_args, dist_args, synth_args, validate_args;

    auto* run = app.add_subcommand("run", "full federated run with the attacker observing");
    add_common(run, run_args);

    auto* first = app.add_subcommand(
        "first-round-attack", "one forced round, attack trained on the single capture");
    add_common(first, first_args);

    auto* dist = app.add_subcommand(
        "distributions", "top-1 confidence of a single-client model, own vs other data");
    add_common(dist, dist_args);

    auto* synth = app.add_subcommand("synth-gen", "write the synthetic corpus to disk");
    add_common(synth, synth_args);

    auto* validate = app.add_subcommand("validate-config",
                                        "parse a config and print the resolved document");
    add_common(validate, validate_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            fedhar::cli::cmd_run(load(run_args), run_args.quiet);
        } else if (first->parsed()) {
            fedhar::cli::cmd_first_round_attack(load(first_args), first_args.quiet);
        } else if (dist->parsed()) {
            fedhar::cli::cmd_distributions(load(dist_args), dist_args.quiet);
        } else if (synth->parsed()) {
            fedhar::cli::cmd_synth_gen(load(synth_args), synth_args.quiet);
        } else if (validate->parsed()) {
            auto cfg = load(validate_args);
            if (!validate_args.quiet) std::cout << cfg.to_json().dump(2) << std::endl;
        }
    } catch (const fedhar::ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const fedhar::Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
