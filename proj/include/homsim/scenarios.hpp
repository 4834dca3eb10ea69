#pragma once

// Figure-reproduction pipelines behind the command-line tool. Each scenario
// reads a strict-schema JSON configuration, writes CSV artifacts plus a
// machine-readable summary.json into the output directory, and returns the
// summary. Output writes are atomic (temp file, then rename), and identical
// config + seed yields byte-identical artifacts.

#include <string>
#include <vector>

#include "json.hpp"

namespace homsim {

struct ScenarioResult {
    nlohmann::ordered_json summary;
    std::vector<std::string> files_written;
};

// Parse a JSON config file; throws std::runtime_error with a diagnostic on
// I/O or syntax errors.
nlohmann::json load_config_file(const std::string& path);

// Full schema and invariant validation; returns one message per problem,
// empty when the config is well-formed. Never runs a simulation.
std::vector<std::string> validate_config(const nlohmann::json& config);

// Run the configured scenario. overrides: seed/scenario replace the config
// values when set. Throws on any module or I/O error.
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> scenario;
    bool quiet = false;
};

ScenarioResult run_scenario(const nlohmann::json& config, const std::string& out_dir,
                            const RunOverrides& overrides = {});

} // namespace homsim
