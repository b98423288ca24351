#include "dmc/errors.hpp"
#include "dmc/io.hpp"
#include "dmc/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace dmc;

namespace {

const RunResult& m1_run() {
    static const RunResult result = [] {
        ScenarioConfig cfg = canonical_scenarios()[1];
        return run(cfg, RunOptions{true});
    }();
    return result;
}

}  // namespace

TEST_CASE("calibration reproduces the initial operating point") {
    const CalibratedPlant plant = calibrate_operating_point(ScenarioConfig{});
    const PlantState& s = plant.initial;
    CHECK(s.bus_voltage == doctest::Approx(5000.0).epsilon(5e-3));
    CHECK(s.generator.p_output == doctest::Approx(70e6).epsilon(5e-3));
    CHECK(s.generator.q_output == doctest::Approx(5e6).epsilon(5e-3));
    // Generator output includes the cable loss, so the load sees slightly less.
    CHECK(s.bus_current == doctest::Approx(14e3).epsilon(0.02));
    const double r_load = plant.params.network.r_load;
    CHECK(s.bus_voltage / r_load == doctest::Approx(s.bus_current));
    CHECK(s.bus_voltage * s.bus_voltage / r_load == doctest::Approx(70e6).epsilon(0.02));
}

TEST_CASE("calibration with no load leaves the bus at its no-load voltage") {
    ScenarioConfig cfg;
    cfg.initial_p = 0.0;
    const CalibratedPlant plant = calibrate_operating_point(cfg);
    CHECK(std::isinf(plant.params.network.r_load));
    CHECK(plant.initial.bus_voltage == doctest::Approx(5000.0).epsilon(1e-9));
    CHECK(plant.initial.bus_current == doctest::Approx(0.0));
}

TEST_CASE("calibration guards the generation rating") {
    ScenarioConfig cfg;
    cfg.initial_p = 90e6;
    CHECK_THROWS_AS(calibrate_operating_point(cfg), CalibrationError);
    cfg.mode = BusMode::SplitPlant;
    cfg.initial_p = 84e6;
    CHECK_THROWS_AS(calibrate_operating_point(cfg), CalibrationError);
    cfg.initial_p = 70e6;
    const CalibratedPlant split = calibrate_operating_point(cfg);
    CHECK(split.initial.generator.p_output == doctest::Approx(35e6).epsilon(5e-3));
}

TEST_CASE("scenario validation") {
    ScenarioConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ScenarioConfig{};
    cfg.charge_start = 70.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ScenarioConfig{};
    cfg.controller.limits.m1_limit = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InfeasibleLimitsError);
}

TEST_CASE("zero-length charging window gives an empty summary") {
    ScenarioConfig cfg;
    cfg.sim_duration = 1.0;
    cfg.charge_start = 1.0;
    const RunResult result = run(cfg);
    CHECK(result.summary.empty);
    CHECK_FALSE(result.summary.completed);
    CHECK_FALSE(result.done_time.has_value());
}

TEST_CASE("a constant metric stream summarizes to equal statistics") {
    ScenarioConfig cfg;
    std::vector<TelemetryRecord> telemetry;
    for (int n = 0; n < 100; ++n) {
        TelemetryRecord r;
        r.sample.time = 5.0 + 0.1 * n;
        r.sample.v_bus = 4321.0;
        r.phase = n < 10 ? Phase::Probing : (n < 99 ? Phase::FixedTracking : Phase::Done);
        r.reference = n < 99 ? 1000.0 : 0.0;
        telemetry.push_back(r);
    }
    const SummaryRow row = summarize(telemetry, cfg);
    CHECK_FALSE(row.empty);
    CHECK(row.completed);
    CHECK(row.max_metric == 4321.0);
    CHECK(row.min_metric == 4321.0);
    CHECK(row.avg_metric == 4321.0);
    CHECK(row.current_upper == 1000.0);
    CHECK(row.charging_time == doctest::Approx(9.9));
}

TEST_CASE("M1 run charges the bank within its limit") {
    const RunResult& r = m1_run();
    REQUIRE(r.done_time.has_value());
    REQUIRE(r.first_suspension_time.has_value());
    const SummaryRow& row = r.summary;
    CHECK(row.completed);
    CHECK(row.min_metric <= row.avg_metric);
    CHECK(row.avg_metric <= row.max_metric);
    CHECK(r.max_m1_after_suspension <= 800.0);
    const double stored = r.final_plant.supercap.stored_energy();
    CHECK(stored >= 300e6);
    CHECK(stored <= 300e6 * 1.01);

    double v_max = 0.0;
    for (const TelemetryRecord& t : r.telemetry) v_max = std::max(v_max, t.sample.v_bus);
    CHECK(row.charging_time >= 300e6 / (v_max * row.current_upper));
}

TEST_CASE("telemetry time is strictly increasing") {
    const auto& tel = m1_run().telemetry;
    for (std::size_t k = 1; k < tel.size(); ++k) REQUIRE(tel[k].sample.time > tel[k - 1].sample.time);
}

TEST_CASE("replaying recorded samples reproduces the recorded commands") {
    const RunResult& r = m1_run();
    REQUIRE(!r.control_trace.empty());
    const ControllerConfig cfg = canonical_scenarios()[1].controller;
    ControllerState s;
    std::size_t mismatches = 0;
    for (const ControlEvent& e : r.control_trace) {
        const ControllerStep out = controller_step(s, e.sample, cfg);
        if (!(out.command == e.command)) ++mismatches;
        s = out.state;
    }
    CHECK(mismatches == 0);
    CHECK(s == r.final_controller);
}

TEST_CASE("summary recomputed from the persisted CSV is identical") {
    const RunResult& r = m1_run();
    std::stringstream csv;
    write_telemetry(csv, r.telemetry);
    const SummaryRow again = summarize(read_telemetry(csv), canonical_scenarios()[1]);
    CHECK(again == r.summary);
}

TEST_CASE("energy bookkeeping closes over the charge") {
    const EnergyLedger& e = m1_run().energy;
    const double delta = e.cap_energy_end - e.cap_energy_start;
    CHECK(std::abs(e.into_capacitor - delta) < 0.005 * 300e6);
    CHECK(std::abs(e.from_bus - e.into_capacitor - e.resistive_loss - e.inductor_energy_end) < 0.005 * 300e6);
}

TEST_CASE("a bank that cannot reach its target trips the watchdog") {
    ScenarioConfig cfg;
    cfg.plant.capacitance = 0.5;
    cfg.controller.limits.target_cap_voltage = 6000.0;
    cfg.controller.limits.m1_limit = 1500.0;
    cfg.controller.limits.m1_alert = 1490.0;
    cfg.sim_duration = 120.0;
    CHECK_THROWS_AS(run(cfg), StalledRunError);
}
