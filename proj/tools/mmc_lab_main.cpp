// mmc-lab: command-line front end for the coupling laboratory.
//
// Usage: mmc-lab <simulate|verify|classify|mirror|tv> --config <path>
//                [--seed N] [--out DIR] [--paths N] [--threads N]
//
// Exit codes: 0 success, 1 bad input, 2 Aldous-violation flag,
// 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mmclab/experiment.hpp"

namespace {

int run_subcommand(mmclab::ExperimentKind kind, const std::string& config_path,
                   const std::optional<uint64_t>& seed_override,
                   const std::optional<long>& paths_override, const std::string& out_dir,
                   int threads) {
    mmclab::ExperimentConfig cfg = mmclab::load_config(config_path);
    if (cfg.kind && *cfg.kind != kind)
        throw mmclab::invalid_argument_error(
            "config: kind in the file disagrees with the chosen subcommand");
    cfg.kind = kind;
    if (seed_override) {
        cfg.seed = *seed_override;
        cfg.echo["seed"] = *seed_override;
    }
    if (paths_override) {
        if (*paths_override < 1)
            throw mmclab::invalid_argument_error("config: n_paths must be >= 1");
        cfg.n_paths = *paths_override;
        cfg.echo["n_paths"] = *paths_override;
    }
    mmclab::ResultRecord rec = mmclab::run_experiment(cfg, out_dir, threads);
    std::cout << rec.doc.dump(2) << std::endl;
    return rec.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mmc-lab: simulation and verification of Markovian maximal couplings"};
    app.require_subcommand(1);

    struct SubArgs {
        std::string config;
        std::string out = "out";
        std::optional<uint64_t> seed;
        std::optional<long> paths;
        int threads = 0;
    };

    std::map<std::string, std::pair<mmclab::ExperimentKind, SubArgs>> subs;
    for (auto kind : {mmclab::ExperimentKind::Simulate, mmclab::ExperimentKind::Verify,
                      mmclab::ExperimentKind::Classify, mmclab::ExperimentKind::Mirror,
                      mmclab::ExperimentKind::Tv}) {
        std::string name = mmclab::to_string(kind);
        auto& entry = subs[name];
        entry.first = kind;
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", entry.second.config, "experiment configuration file")
            ->required();
        sub->add_option("--seed", entry.second.seed, "override the configured seed");
        sub->add_option("--out", entry.second.out, "output directory (default: out)");
        sub->add_option("--paths", entry.second.paths, "override the configured path count");
        sub->add_option("--threads", entry.second.threads,
                        "worker threads (default: MMC_LAB_THREADS or hardware)");
    }

    CLI11_PARSE(app, argc, argv);

    for (auto& [name, entry] : subs) {
        CLI::App* sub = app.get_subcommand(name);
        if (!sub->parsed()) continue;
        int threads = entry.second.threads > 0 ? entry.second.threads
                                               : mmclab::default_thread_count();
        try {
            return run_subcommand(entry.first, entry.second.config, entry.second.seed,
                                  entry.second.paths, entry.second.out, threads);
        } catch (const mmclab::numerical_failure_error& e) {
            std::cerr << "numerical failure: " << e.what()
                      << " (best estimate " << e.best_estimate << ")" << std::endl;
            return 3;
        } catch (const mmclab::error& e) {
            std::cerr << "error: " << e.what() << std::endl;
            return 1;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << std::endl;
            return 1;
        }
    }
    return 1;
}
