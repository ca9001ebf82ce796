#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rm/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Revenue-management estimation and counterfactual pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool seed_set = false;

    const char* commands[] = {"simulate", "estimate", "bounds", "counterfactual",
                              "infer", "report"};
    const char* help[] = {
        "Generate a synthetic sales panel",
        "Fit the three-stage demand model",
        "Identify per-cell demand-level intervals",
        "Evaluate counterfactual pricing strategies",
        "Subsampling test of the revenue gap",
        "Assemble the final report from prior stages",
    };
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        auto* sub = app.add_subcommand(commands[i], help[i]);
        sub->add_option("--config", config_path, "Path to a key = value config file");
        sub->add_option("--out", out_override, "Output directory (overrides config)");
        sub->add_option("--seed", seed_override, "RNG seed (overrides config)")
            ->each([&](const std::string&) { seed_set = true; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        rm::RunConfig cfg = rm::load_config(config_path);
        cfg.command = app.get_subcommands().front()->get_name();
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (seed_set) cfg.seed = seed_override;
        return rm::run_pipeline(cfg);
    } catch (const rm::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
