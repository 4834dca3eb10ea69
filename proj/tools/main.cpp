// homsim: quantum-memory-assisted HOM interference simulator and time-tag
// analysis tool.
//
//   homsim run --config configs/hom_dip.json --out results
//   homsim validate --config configs/hom_dip.json

#include <iostream>

#include "CLI11.hpp"

#include "homsim/scenarios.hpp"

int main(int argc, char** argv) {
    CLI::App app{"quantum-memory HOM interference simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string scenario_override;
    std::uint64_t seed_override = 0;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "run a scenario and write its artifacts");
    run->add_option("--config", config_path, "scenario configuration file")
        ->required();
    run->add_option("--out", out_dir, "output directory (default: out)");
    auto* seed_opt =
        run->add_option("--seed", seed_override, "override the configured seed");
    auto* scen_opt = run->add_option("--scenario", scenario_override,
                                     "override the configured scenario");
    run->add_flag("--quiet", quiet, "suppress progress output");

    auto* validate =
        app.add_subcommand("validate", "check a configuration without running it");
    validate->add_option("--config", config_path, "scenario configuration file")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            const auto cfg = homsim::load_config_file(config_path);
            const auto errors = homsim::validate_config(cfg);
            if (errors.empty()) {
                std::cout << "ok\n";
                return 0;
            }
            for (const auto& e : errors) std::cout << e << "\n";
            return 1;
        }

        const auto cfg = homsim::load_config_file(config_path);
        if (cfg.contains("output_dir") && out_dir == "out")
            out_dir = cfg.at("output_dir").get<std::string>();
        homsim::RunOverrides overrides;
        overrides.quiet = quiet;
        if (seed_opt->count() > 0) overrides.seed = seed_override;
        if (scen_opt->count() > 0) overrides.scenario = scenario_override;
        const auto result = homsim::run_scenario(cfg, out_dir, overrides);
        if (!quiet) std::cout << result.summary.dump(2) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
