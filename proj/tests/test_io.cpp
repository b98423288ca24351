#include "dmc/errors.hpp"
#include "dmc/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

using namespace dmc;
namespace fs = std::filesystem;

TEST_CASE("format_double round-trips exactly") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e7, 1e7);
    for (int i = 0; i < 10000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
        REQUIRE(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(5000.0) == "5000");
}

TEST_CASE("empty config yields the defaults") {
    CHECK(parse_config("") == ScenarioConfig{});
    CHECK(parse_config("# only a comment\n\n") == ScenarioConfig{});
}

TEST_CASE("config keys are applied with comments and whitespace") {
    const ScenarioConfig c = parse_config(
        "[scenario]\n"
        "  mode = split   # islanded\n"
        "control_mode=m2\n"
        "duration_s = 90\n"
        "[limits]\n"
        "q_limit_var = 6e6\n"
        "[plant]\n"
        "integrator = heun\n");
    CHECK(c.mode == BusMode::SplitPlant);
    CHECK(c.controller.mode == ControlMode::M2);
    CHECK(c.sim_duration == 90.0);
    CHECK(c.controller.limits.q_limit == 6e6);
    CHECK(c.plant.integrator == Integrator::Heun);
}

TEST_CASE("config errors name the offending line and key") {
    auto message = [](std::string_view text) {
        try {
            parse_config(text, {}, "cfg");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("[limits]\nm1_limit_V = 600\nbogus_key = 3\n") == "cfg:3: unknown key 'bogus_key' in [limits]");
    CHECK(message("[nowhere]\n").find("cfg:1: unknown section") == 0);
    CHECK(message("dt_s = 1\n").find("cfg:1:") == 0);
    CHECK(message("[scenario]\ndt_s = fast\n").find("cfg:2: key 'dt_s'") == 0);
    CHECK(message("[scenario]\ndt_s = 1\ndt_s = 2\n").find("cfg:3: duplicate") == 0);
    CHECK(message("[scenario]\nmode = mesh\n").find("expected one of ring|split") != std::string::npos);
    CHECK(message("[scenario\n").find("cfg:1: unterminated") == 0);
}

TEST_CASE("resolved config dumps parse back to the same config") {
    ScenarioConfig c;
    CHECK(parse_config(dump_config(c)) == c);
    for (const ScenarioConfig& k : canonical_scenarios()) CHECK(parse_config(dump_config(k)) == k);

    c.mode = BusMode::SplitPlant;
    c.controller.mode = ControlMode::M2;
    c.plant.x_sync = 0.1 / 3.0;
    c.controller.gains.kp = 1.0 / 7.0;
    c.plant.integrator = Integrator::Heun;
    c.name = "custom run";
    CHECK(parse_config(dump_config(c)) == c);
}

TEST_CASE("telemetry CSV layout") {
    std::ostringstream empty;
    write_telemetry(empty, {});
    CHECK(empty.str() == std::string(kTelemetryHeader) + "\n");

    TelemetryRecord r;
    r.sample = MetricSample{5.5, 4800.0, 6e6, 1200.0, 300.0, 1687500.0};
    r.phase = Phase::Probing;
    r.duty = 0.25;
    r.reference = 1250.0;
    std::ostringstream one;
    write_telemetry(one, {r});
    CHECK(one.str() == std::string(kTelemetryHeader) + "\n5.5,4800,6e+06,1200,300,1687500,Probing,0.25,1250\n");
}

TEST_CASE("telemetry CSV round-trips bit-for-bit") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1e7);
    std::vector<TelemetryRecord> rows;
    for (int i = 0; i < 500; ++i) {
        TelemetryRecord r;
        r.sample = MetricSample{i * 0.005, u(rng), u(rng), u(rng), u(rng), u(rng)};
        r.phase = static_cast<Phase>(i % 6);
        r.duty = u(rng) / 1e7;
        r.reference = u(rng);
        rows.push_back(r);
    }
    std::stringstream ss;
    write_telemetry(ss, rows);
    const auto back = read_telemetry(ss);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].sample.time == rows[i].sample.time);
        CHECK(back[i].sample.v_bus == rows[i].sample.v_bus);
        CHECK(back[i].sample.q_mtg == rows[i].sample.q_mtg);
        CHECK(back[i].sample.stored_energy == rows[i].sample.stored_energy);
        CHECK(back[i].phase == rows[i].phase);
        CHECK(back[i].duty == rows[i].duty);
        CHECK(back[i].reference == rows[i].reference);
    }
}

TEST_CASE("malformed telemetry is rejected") {
    std::istringstream bad_header("time,v\n");
    CHECK_THROWS(read_telemetry(bad_header));
    std::istringstream bad_row(std::string(kTelemetryHeader) + "\n1,2,3\n");
    CHECK_THROWS(read_telemetry(bad_row));
    std::istringstream bad_phase(std::string(kTelemetryHeader) + "\n1,2,3,4,5,6,Charging,0,0\n");
    CHECK_THROWS(read_telemetry(bad_phase));
}

TEST_CASE("telemetry file writes are atomic") {
    const fs::path dir = fs::temp_directory_path() / "dmc_io_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_telemetry(dir / "t.csv", {});
    CHECK(fs::exists(dir / "t.csv"));
    CHECK_FALSE(fs::exists(dir / "t.csv.partial"));
    CHECK_THROWS(write_telemetry(dir / "missing" / "t.csv", {}));
    CHECK_FALSE(fs::exists(dir / "missing"));
    fs::remove_all(dir);
}

TEST_CASE("summary outputs") {
    SummaryRow m1;
    m1.test_setting = "M1_limit=0.8 kV";
    m1.empty = false;
    m1.completed = true;
    m1.max_metric = 4500.0;
    m1.min_metric = 4201.0;
    m1.avg_metric = 4208.0;
    m1.current_upper = 4300.0;
    m1.charging_time = 19.0;
    SummaryRow m2 = m1;
    m2.test_setting = "M2_limit=10 Mvar";
    m2.band = true;
    m2.max_metric = 11.15e6;
    m2.min_metric = 5e6;
    m2.avg_metric = 9.58e6;
    m2.current_upper = 3300.0;
    m2.current_lower = 2970.0;

    std::ostringstream csv;
    write_summary_csv(csv, {m1, m2});
    CHECK(csv.str() == std::string(kSummaryHeader) +
                           "\nM1_limit=0.8 kV,4500,4201,4208,V,,4300,19,1\n"
                           "M2_limit=10 Mvar,11150000,5e+06,9580000,var,2970,3300,19,1\n");

    std::ostringstream table;
    write_summary_table(table, {m1, m2});
    const std::string t = table.str();
    CHECK(t.find("test setting") == 0);
    CHECK(t.find("charging current value") != std::string::npos);
    CHECK(t.find("4.30 kA") != std::string::npos);
    CHECK(t.find("(2.97, 3.30) kA") != std::string::npos);
    CHECK(t.find("11.15 Mvar") != std::string::npos);
    CHECK(t.find("4.208 kV") != std::string::npos);
}
