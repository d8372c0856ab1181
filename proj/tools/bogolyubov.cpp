// Command-line scenario runner.
//
//   bogolyubov run    --config FILE [--out DIR] [--eps LIST] [--seed U64] [--threads N]
//   bogolyubov sweep  --config FILE --eps LIST [--out DIR] [--seed U64] [--threads N]
//   bogolyubov report --out DIR
//
// Exit codes: 0 success, 2 validation failure, 3 numerical failure,
// 4 a run finished with a failing verdict.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "bogolyubov/config.hpp"
#include "bogolyubov/errors.hpp"
#include "bogolyubov/pipeline.hpp"

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::string eps;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

bogolyubov::ScenarioConfig load(const Flags& flags) {
    auto config = bogolyubov::load_config(flags.config);
    if (!flags.eps.empty()) config.experiment.eps = bogolyubov::parse_list(flags.eps);
    if (flags.seed) config.experiment.seed = *flags.seed;
    if (flags.threads) config.experiment.threads = *flags.threads;
    return config;
}

int run(const Flags& flags) {
    const auto config = load(flags);
    const std::string out = flags.out.empty() ? "out/" + config.name : flags.out;
    const auto result = bogolyubov::run_scenario(config, out);
    std::cout << bogolyubov::report(out);
    std::cout << "artifacts written to " << out << "\n";
    return result.all_pass() ? 0 : 4;
}

int sweep(const Flags& flags) {
    const auto config = load(flags);
    const auto table = bogolyubov::sweep_epsilon(config, config.experiment.eps);
    bogolyubov::write_convergence_csv(std::cout, table);
    if (!flags.out.empty()) {
        std::filesystem::create_directories(flags.out);
        std::ofstream csv(std::filesystem::path(flags.out) / "convergence.csv");
        bogolyubov::write_convergence_csv(csv, table);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Averaging experiments for recurrent stochastic differential equations"};
    app.require_subcommand(1);
    Flags flags;

    auto* run_cmd = app.add_subcommand("run", "run every stage of a scenario");
    auto* sweep_cmd = app.add_subcommand("sweep", "coupled L2 and beta sweep over an eps list");
    auto* report_cmd = app.add_subcommand("report", "render the summary of an artifact directory");
    for (auto* cmd : {run_cmd, sweep_cmd}) {
        cmd->add_option("--config", flags.config, "scenario file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", flags.out, "artifact directory");
        cmd->add_option("--eps", flags.eps, "comma-separated eps list");
        cmd->add_option("--seed", flags.seed, "master seed");
        cmd->add_option("--threads", flags.threads, "worker threads (0 = all cores)");
    }
    report_cmd->add_option("--out", flags.out, "artifact directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*run_cmd) return run(flags);
        if (*sweep_cmd) return sweep(flags);
        std::cout << bogolyubov::report(flags.out);
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
