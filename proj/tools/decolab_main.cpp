// decolab — experiment runner for the oscillator-in-a-reservoir models
//
//   decolab run <experiment> --config <path> [--seed N] [--out DIR] [--threads K]
//   decolab list
//
// Exit codes: 0 all in-run tolerances pass, 1 tolerance breach, 2 usage error.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "decolab/config.hpp"
#include "decolab/experiments.hpp"

namespace {

int run_command(const std::string& experiment, const std::string& config_path,
                long long seed_override, const std::string& out_override, unsigned threads) {
    using namespace decolab;

    bool known = false;
    for (const auto& [name, desc] : experiments::experiment_list())
        known = known || name == experiment;
    if (!known) {
        std::cerr << "decolab: unknown experiment '" << experiment << "'\n";
        std::cerr << "run `decolab list` for the available experiments\n";
        return 2;
    }

    config::ExperimentConfig cfg;
    try {
        if (!config_path.empty()) cfg = config::load_config(config_path);
    } catch (const config::parse_error& e) {
        std::cerr << "decolab: config error: " << e.what() << "\n";
        return 2;
    }
    if (!cfg.experiment.empty() && cfg.experiment != experiment) {
        std::cerr << "decolab: config names experiment '" << cfg.experiment
                  << "' but '" << experiment << "' was requested\n";
        return 2;
    }
    cfg.experiment = experiment;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (!out_override.empty()) cfg.out_dir = out_override;

    std::cout << "# effective configuration\n" << config::echo(cfg) << std::flush;

    const auto t0 = std::chrono::steady_clock::now();
    experiments::ExperimentReport report;
    try {
        report = experiments::run_experiment(experiment, cfg, threads);
    } catch (const std::exception& e) {
        std::cerr << "decolab: experiment failed: " << e.what() << "\n";
        return 2;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const int status = report.all_pass() ? 0 : 1;
    for (const auto& c : report.checks) {
        std::printf("%-4s %s (measured=%.6g expected=%.6g tol=%.3g)\n",
                    c.pass ? "ok" : "FAIL", c.name.c_str(), c.measured, c.expected, c.tolerance);
    }

    nlohmann::json jreport;
    jreport["experiment"] = report.experiment;
    jreport["status"] = status == 0 ? "pass" : "fail";
    for (const auto& c : report.checks) {
        jreport["checks"].push_back({{"name", c.name},
                                     {"measured", c.measured},
                                     {"expected", c.expected},
                                     {"tolerance", c.tolerance},
                                     {"pass", c.pass}});
    }
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream((std::filesystem::path(cfg.out_dir) / "report.json").string()) << jreport.dump(2) << "\n";
    config::write_manifest((std::filesystem::path(cfg.out_dir) / "manifest.txt").string(), cfg, wall,
                           status);
    return status;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decolab — stochastic models of an oscillator in a reservoir"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "list experiments");

    std::string experiment, config_path, out_dir;
    long long seed = -1;
    unsigned threads = 1;
    auto* run = app.add_subcommand("run", "run an experiment");
    run->add_option("experiment", experiment, "experiment name")->required();
    run->add_option("--config", config_path, "configuration file (key = value lines)");
    run->add_option("--seed", seed, "override the RNG seed");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--threads", threads, "worker thread cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (list->parsed()) {
        for (const auto& [name, desc] : decolab::experiments::experiment_list())
            std::printf("%-22s %s\n", name.c_str(), desc.c_str());
        return 0;
    }
    return run_command(experiment, config_path, seed, out_dir, threads);
}
