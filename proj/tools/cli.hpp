#pragma once

#include "dmc/scenario.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dmc::cli {

/// Entry point shared by the executable and the tests.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Directory-safe identifier derived from a scenario name.
std::string scenario_id(const std::string& name);

/// Worker count for batch runs: DMC_SIM_THREADS when set and positive,
/// otherwise the hardware concurrency, never more than `jobs`.
unsigned batch_threads(std::size_t jobs);

struct ScenarioOutcome {
    std::string id;
    SummaryRow summary;
    double wall_seconds = 0.0;
};

struct Overrides {
    std::optional<double> dt;
    std::optional<double> duration;
    std::optional<int> decimation;
};

void apply(const Overrides& o, ScenarioConfig& config);

/// Runs one scenario and writes telemetry.csv, summary.csv, summary.txt and
/// resolved.cfg into `dir`, which must already exist.
ScenarioOutcome run_into(const ScenarioConfig& config, const std::filesystem::path& dir);

/// The canonical cases with plant, operating point and overrides taken from `base`.
std::vector<ScenarioConfig> batch_configs(const ScenarioConfig& base, const Overrides& o);

}  // namespace dmc::cli
