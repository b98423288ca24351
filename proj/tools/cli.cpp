#include "cli.hpp"

#include "dmc/errors.hpp"
#include "dmc/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <unistd.h>

#ifndef DMC_VERSION
#define DMC_VERSION "0.0.0"
#endif

namespace dmc::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream ss;
    write_summary_csv(ss, rows);
    return ss.str();
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
    std::ostringstream ss;
    write_summary_table(ss, rows);
    return ss.str();
}

// Builds a directory next to `target`, hands it to `fill`, then swaps it into
// place. A failure leaves any previous `target` untouched.
template <class Fill>
void populate_atomically(const fs::path& target, Fill fill) {
    const fs::path parent = target.parent_path().empty() ? fs::path(".") : target.parent_path();
    fs::create_directories(parent);
    static std::atomic<unsigned> counter{0};
    const fs::path tmp = parent / ("." + target.filename().string() + ".tmp." + std::to_string(::getpid()) + "." +
                                   std::to_string(counter++));
    fs::remove_all(tmp);
    fs::create_directory(tmp);
    try {
        fill(tmp);
        if (fs::exists(target)) fs::remove_all(target);
        fs::rename(tmp, target);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(tmp, ec);
        throw;
    }
}

nlohmann::json manifest(const std::optional<fs::path>& config_path, const fs::path& out_dir,
                        const std::vector<ScenarioOutcome>& outcomes) {
    nlohmann::json j;
    j["tool"] = "dmc-sim";
    j["version"] = DMC_VERSION;
    j["config"] = config_path ? nlohmann::json(config_path->string()) : nlohmann::json(nullptr);
    j["output_dir"] = out_dir.string();
    j["scenarios"] = nlohmann::json::array();
    for (const ScenarioOutcome& o : outcomes) {
        j["scenarios"].push_back({{"id", o.id},
                                  {"test_setting", o.summary.test_setting},
                                  {"completed", o.summary.completed},
                                  {"wall_clock_s", o.wall_seconds}});
    }
    return j;
}

ScenarioConfig base_config(const std::optional<fs::path>& path) {
    return path ? load_config(*path) : ScenarioConfig{};
}

void add_overrides(CLI::App& cmd, Overrides& o, std::optional<long>& seed) {
    cmd.add_option("--dt", o.dt, "Integration step in seconds")->check(CLI::PositiveNumber);
    cmd.add_option("--duration", o.duration, "Simulated time in seconds")->check(CLI::PositiveNumber);
    cmd.add_option("--decimation", o.decimation, "Record every n-th step")->check(CLI::PositiveNumber);
    cmd.add_option("--seed", seed, "Reserved; the simulation is deterministic");
}

int cmd_run(const std::optional<fs::path>& config_path, const fs::path& out_dir, const Overrides& o,
            std::ostream& out) {
    ScenarioConfig config = base_config(config_path);
    apply(o, config);
    config.validate();
    const std::string id = scenario_id(config.name);
    ScenarioOutcome outcome;
    populate_atomically(out_dir / id, [&](const fs::path& tmp) {
        outcome = run_into(config, tmp);
        write_text(tmp / "manifest.json", manifest(config_path, out_dir / id, {outcome}).dump(2) + "\n");
    });
    out << summary_table({outcome.summary});
    return 0;
}

int cmd_batch(const std::optional<fs::path>& config_path, const fs::path& out_dir, const Overrides& o,
              std::ostream& out) {
    const std::vector<ScenarioConfig> configs = batch_configs(base_config(config_path), o);
    for (const ScenarioConfig& c : configs) c.validate();

    std::vector<ScenarioOutcome> outcomes(configs.size());
    populate_atomically(out_dir, [&](const fs::path& tmp) {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (std::size_t i = next++; i < configs.size(); i = next++) {
                try {
                    const fs::path dir = tmp / scenario_id(configs[i].name);
                    fs::create_directory(dir);
                    outcomes[i] = run_into(configs[i], dir);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        };
        const unsigned n_threads = batch_threads(configs.size());
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
        pool.clear();
        if (failure) std::rethrow_exception(failure);

        std::vector<SummaryRow> rows;
        for (const ScenarioOutcome& oc : outcomes) rows.push_back(oc.summary);
        write_text(tmp / "summary.csv", summary_csv(rows));
        write_text(tmp / "summary.txt", summary_table(rows));
        write_text(tmp / "manifest.json", manifest(config_path, out_dir, outcomes).dump(2) + "\n");
    });

    std::vector<SummaryRow> rows;
    for (const ScenarioOutcome& oc : outcomes) rows.push_back(oc.summary);
    out << summary_table(rows);
    return 0;
}

int cmd_summarize(const fs::path& csv, std::optional<fs::path> config_path, const std::string& format,
                  std::ostream& out) {
    if (!config_path) {
        const fs::path sibling = csv.parent_path() / "resolved.cfg";
        if (fs::exists(sibling)) config_path = sibling;
    }
    const ScenarioConfig config = base_config(config_path);
    const SummaryRow row = summarize(read_telemetry(csv), config);
    out << (format == "csv" ? summary_csv({row}) : summary_table({row}));
    return 0;
}

int cmd_validate(const fs::path& path) {
    const ScenarioConfig config = load_config(path);
    config.validate();
    calibrate_operating_point(config);
    return 0;
}

}  // namespace

std::string scenario_id(const std::string& name) {
    std::string id;
    for (char ch : name) {
        const unsigned char u = static_cast<unsigned char>(ch);
        if (std::isalnum(u) || ch == '.' || ch == '-') {
            id += static_cast<char>(std::tolower(u));
        } else if (!id.empty() && id.back() != '_') {
            id += '_';
        }
    }
    while (!id.empty() && id.back() == '_') id.pop_back();
    return id.empty() ? "scenario" : id;
}

unsigned batch_threads(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("DMC_SIM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) n = static_cast<unsigned>(v);
    }
    return static_cast<unsigned>(std::clamp<std::size_t>(n, 1, std::max<std::size_t>(jobs, 1)));
}

void apply(const Overrides& o, ScenarioConfig& config) {
    if (o.dt) config.dt = *o.dt;
    if (o.duration) config.sim_duration = *o.duration;
    if (o.decimation) config.decimation = *o.decimation;
}

ScenarioOutcome run_into(const ScenarioConfig& config, const fs::path& dir) {
    ScenarioOutcome outcome;
    outcome.id = scenario_id(config.name);
    const auto start = std::chrono::steady_clock::now();
    const RunResult result = run(config);
    outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    outcome.summary = result.summary;

    write_telemetry(dir / "telemetry.csv", result.telemetry);
    write_text(dir / "summary.csv", summary_csv({result.summary}));
    write_text(dir / "summary.txt", summary_table({result.summary}));
    write_text(dir / "resolved.cfg", dump_config(config));
    return outcome;
}

std::vector<ScenarioConfig> batch_configs(const ScenarioConfig& base, const Overrides& o) {
    std::vector<ScenarioConfig> configs = canonical_scenarios();
    for (ScenarioConfig& c : configs) {
        c.mode = base.mode;
        c.initial_p = base.initial_p;
        c.initial_q = base.initial_q;
        c.charge_start = base.charge_start;
        c.dt = base.dt;
        c.decimation = base.decimation;
        c.watchdog_window = base.watchdog_window;
        c.grace_window = base.grace_window;
        c.plant = base.plant;
        const Limits canonical = c.controller.limits;
        const ControlMode mode = c.controller.mode;
        c.controller = base.controller;
        c.controller.mode = mode;
        c.controller.limits.m1_limit = canonical.m1_limit;
        c.controller.limits.m1_alert = canonical.m1_alert;
        c.controller.limits.q_limit = canonical.q_limit;
        c.controller.limits.q_alert = canonical.q_alert;
        c.controller.limits.attenuation = canonical.attenuation;
        apply(o, c);
    }
    return configs;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Supercapacitor charging under disturbance metric control", "dmc-sim"};
    app.set_version_flag("--version", std::string(DMC_VERSION));
    app.require_subcommand(1);

    std::optional<fs::path> config_path;
    fs::path out_dir = "out";
    Overrides overrides;
    std::optional<long> seed;

    CLI::App* run_cmd = app.add_subcommand("run", "Run one scenario from a config file");
    run_cmd->add_option("--config", config_path, "Scenario config file")->check(CLI::ExistingFile);
    run_cmd->add_option("--out", out_dir, "Output directory");
    add_overrides(*run_cmd, overrides, seed);

    CLI::App* batch_cmd = app.add_subcommand("batch", "Run the four canonical charging cases");
    batch_cmd->add_option("--config", config_path, "Base config supplying plant settings")->check(CLI::ExistingFile);
    batch_cmd->add_option("--out", out_dir, "Output directory");
    add_overrides(*batch_cmd, overrides, seed);

    fs::path csv_path;
    std::string format = "table";
    CLI::App* sum_cmd = app.add_subcommand("summarize", "Recompute the summary row from a telemetry CSV");
    sum_cmd->add_option("telemetry", csv_path, "Telemetry CSV")->required()->check(CLI::ExistingFile);
    sum_cmd->add_option("--config", config_path, "Config used for the run (default: sibling resolved.cfg)")
        ->check(CLI::ExistingFile);
    sum_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "csv"}));

    fs::path validate_path;
    CLI::App* val_cmd = app.add_subcommand("validate-config", "Check a config file; silent on success");
    auto* val_pos = val_cmd->add_option("path", validate_path, "Config file");
    auto* val_opt = val_cmd->add_option("--config", config_path, "Config file");
    val_pos->excludes(val_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*run_cmd) return cmd_run(config_path, out_dir, overrides, out);
        if (*batch_cmd) return cmd_batch(config_path, out_dir, overrides, out);
        if (*sum_cmd) return cmd_summarize(csv_path, config_path, format, out);
        if (*val_cmd) {
            if (validate_path.empty() && !config_path) {
                err << "dmc-sim: validate-config needs a config file\n";
                return 2;
            }
            return cmd_validate(validate_path.empty() ? *config_path : validate_path);
        }
    } catch (const InfeasibleLimitsError& e) {
        err << "dmc-sim: infeasible limits: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "dmc-sim: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace dmc::cli
