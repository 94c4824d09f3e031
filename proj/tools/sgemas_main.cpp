// sgemas command-line tool: config-driven simulation, detection, evaluation
// and ablation sweeps. See README.md for the config grammar and presets.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sgemas/commands.hpp"
#include "sgemas/config.hpp"
#include "sgemas/errors.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "path to the run config file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "override the config seed (engine and generator)");
    cmd->add_option("--out", opts.out_dir, "override the output directory");
}

sgemas::RunConfig load(const CommonOpts& opts) {
    auto rc = sgemas::load_run_config(sgemas::ConfigFile::parse_file(opts.config_path));
    if (opts.seed) sgemas::override_seed(rc, *opts.seed);
    if (opts.out_dir) sgemas::override_out_dir(rc, *opts.out_dir);
    rc.validate();
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sgemas: metabolic agent-population anomaly detection"};
    app.require_subcommand(1);

    CommonOpts sim_opts, det_opts, eval_opts, abl_opts;
    CLI::App* sim = app.add_subcommand("simulate", "run the engine on a synthetic stream");
    add_common(sim, sim_opts);
    CLI::App* det = app.add_subcommand("detect", "score a CSV stream per sample or per beat");
    add_common(det, det_opts);
    CLI::App* eval = app.add_subcommand("evaluate", "ROC/AUC of engine (and baseline) on labeled input");
    add_common(eval, eval_opts);
    CLI::App* abl = app.add_subcommand("ablate", "variant sweep with paired significance tests");
    add_common(abl, abl_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) sgemas::cmd_simulate(load(sim_opts));
        if (det->parsed()) sgemas::cmd_detect(load(det_opts));
        if (eval->parsed()) sgemas::cmd_evaluate(load(eval_opts));
        if (abl->parsed()) sgemas::cmd_ablate(load(abl_opts));
    } catch (const sgemas::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const sgemas::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
