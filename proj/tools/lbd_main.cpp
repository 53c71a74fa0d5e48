#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lbd/errors.hpp"
#include "lbd/pipeline.hpp"
#include "lbd/run_config.hpp"
#include "lbd/version.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int replicas = 0;
    int threads = 1;
};

lbd::RunConfig load(const CommonArgs& args) {
    lbd::RunConfig cfg = lbd::load_run_config(args.config_path);
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    if (args.seed_set) cfg.master_seed = args.seed;
    if (args.replicas > 0) cfg.replicas = args.replicas;
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool with_threads = true) {
    cmd->add_option("--config", args.config_path, "run configuration file")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "master seed (overrides config)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--replicas", args.replicas, "replica count (overrides config)");
    if (with_threads)
        cmd->add_option("--threads", args.threads,
                        "worker threads (affects speed only, never results)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"continuum logistic birth-death simulator and hierarchy solver"};
    app.set_version_flag("--version", lbd::kVersion);
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* c_validate = app.add_subcommand("validate", "check the config and print derived constants");
    CLI::App* c_simulate = app.add_subcommand("simulate", "run the jump-process ensemble");
    CLI::App* c_solve = app.add_subcommand("solve", "integrate the truncated correlation hierarchy");
    CLI::App* c_estimate = app.add_subcommand("estimate", "estimate moments, correlations and functionals");
    CLI::App* c_verify = app.add_subcommand("verify", "check the provable bounds, write verdicts.json");
    CLI::App* c_sweep = app.add_subcommand("sweep", "simulate across the sigma regularization family");
    CLI::App* c_report = app.add_subcommand("report", "render the summary table and plot data");
    for (CLI::App* cmd : {c_validate, c_simulate, c_solve, c_estimate, c_verify, c_sweep, c_report})
        add_common(cmd, args);

    CLI11_PARSE(app, argc, argv);

    try {
        const lbd::RunConfig cfg = load(args);
        if (c_validate->parsed()) {
            lbd::pipeline::validate(cfg, std::cout);
            return 0;
        }
        if (c_simulate->parsed()) {
            lbd::pipeline::simulate(cfg, args.threads);
            std::cout << "simulate: wrote artifacts to " << cfg.output_dir << "\n";
            return 0;
        }
        if (c_solve->parsed()) {
            lbd::pipeline::solve(cfg);
            std::cout << "solve: wrote solution grids to " << cfg.output_dir << "\n";
            return 0;
        }
        if (c_estimate->parsed()) {
            lbd::pipeline::estimate(cfg);
            std::cout << "estimate: wrote estimate tables to " << cfg.output_dir << "\n";
            return 0;
        }
        if (c_verify->parsed()) {
            const auto checks = lbd::pipeline::verify(cfg);
            bool all_pass = true;
            for (const auto& c : checks) {
                std::cout << c.name << ": " << to_string(c.verdict) << "\n";
                if (c.verdict != lbd::Verdict::Pass) all_pass = false;
            }
            return all_pass ? 0 : 1;
        }
        if (c_sweep->parsed()) {
            const auto table = lbd::pipeline::sweep(cfg, args.threads);
            std::cout << "sweep: " << table.sigmas.size() << " sigma values, "
                      << "monotone trend at "
                      << [&] {
                             int n = 0;
                             for (bool b : table.monotone_in_sigma)
                                 if (b) ++n;
                             return n;
                         }()
                      << "/" << table.monotone_in_sigma.size() << " times\n";
            return 0;
        }
        if (c_report->parsed()) return lbd::pipeline::report(cfg, std::cout);
    } catch (const lbd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const lbd::MissingArtifactError& e) {
        std::cerr << "missing artifact: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
