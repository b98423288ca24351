#pragma once

// Text formats: the line-based scenario config and the telemetry / summary CSVs.
//
// Config files are `key = value` lines grouped under `[section]` headers,
// SI units throughout, `#` starts a comment. Every key has a default, so an
// empty file is a valid config.

#include "dmc/scenario.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dmc {

/// Parses config text on top of `base`. Throws ConfigError naming the line
/// and key on unknown sections, unknown keys or malformed values.
ScenarioConfig parse_config(std::string_view text, const ScenarioConfig& base = {},
                            std::string_view source = "<config>");

ScenarioConfig load_config(const std::filesystem::path& path, const ScenarioConfig& base = {});

/// Full resolved config, every key written. parse_config(dump_config(c)) == c.
std::string dump_config(const ScenarioConfig& config);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

inline constexpr std::string_view kTelemetryHeader =
    "time_s,v_bus_V,q_mtg_var,i_charge_A,v_cap_V,energy_J,phase,duty,reference_A";

void write_telemetry(std::ostream& out, const std::vector<TelemetryRecord>& telemetry);

/// Writes to a sibling temporary and renames into place; on failure the
/// partial file is removed and std::runtime_error is thrown.
void write_telemetry(const std::filesystem::path& path, const std::vector<TelemetryRecord>& telemetry);

/// Reads a telemetry CSV back. Throws std::runtime_error on malformed input.
std::vector<TelemetryRecord> read_telemetry(std::istream& in);
std::vector<TelemetryRecord> read_telemetry(const std::filesystem::path& path);

inline constexpr std::string_view kSummaryHeader =
    "test_setting,max_metric,min_metric,avg_metric,metric_unit,current_lower_A,current_upper_A,"
    "charging_time_s,completed";

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Aligned plain-text table with the columns of the results table.
void write_summary_table(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace dmc
