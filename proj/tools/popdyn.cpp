#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "popdyn/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Discrete-time population models: simulation, stability, basins and optimal harvesting"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::string adjoint_mode;

    const std::map<std::string, std::string> commands{
        {"simulate", "Iterate each simulate scenario and write its trajectory"},
        {"equilibria", "Classify the equilibria of each equilibria scenario"},
        {"basin", "Grid-scan the basin of attraction of each basin scenario"},
        {"optimize", "Solve each optimal harvesting scenario by forward-backward sweep"},
        {"table1", "Compare optimal and constant harvesting for each table1 scenario"},
        {"validate", "Check the config; with --seed also cross-check classifiers"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory (overrides output_dir in the config)");
        sub->add_option("--seed", seed, "Seed for the randomized cross-check");
        sub->add_option("--adjoint-mode", adjoint_mode, "Adjoint recursion for control problems")
            ->check(CLI::IsMember({"consistent", "paper-literal"}));
    }

    CLI11_PARSE(app, argc, argv);

    const CLI::App* sub = app.get_subcommands().front();
    popdyn::RunOptions opts;
    opts.config = config;
    if (sub->count("--out") > 0) opts.out_dir = out_dir;
    if (sub->count("--seed") > 0) opts.seed = seed;
    if (sub->count("--adjoint-mode") > 0) {
        opts.adjoint_mode = adjoint_mode == "consistent" ? popdyn::AdjointMode::Consistent
                                                         : popdyn::AdjointMode::PaperLiteral;
    }
    return popdyn::run_command(sub->get_name(), opts, std::cout, std::cerr);
}
