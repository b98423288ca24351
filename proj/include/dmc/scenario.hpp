#pragma once

// Closed-loop scenario runner: calibrates the pre-charge operating point,
// steps plant and controller together and reduces the telemetry to one
// summary row per run.

#include "dmc/controller.hpp"
#include "dmc/plant.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dmc {

/// Machine, network and charger constants that are not solved for during
/// calibration. Reactances and resistances are the ring-mode aggregate.
struct PlantSettings {
    double bus_voltage = 5e3;            // V, pre-charge bus voltage to calibrate at
    double x_sync = 0.045;               // ohm
    double x_transient = 0.0129;         // ohm
    double t_reactance_relax = 0.6;      // s
    double t_exciter = 1.0;              // s
    double avr_gain = 1.0;
    double emf_ceiling_ratio = 1.3;
    double r_line = 0.005;               // ohm
    double r_commutation = 0.24;         // ohm
    double rectifier_gain = 1.35;
    double disturbance_threshold = 0.05;
    double l_filter = 1e-3;              // H
    double r_parasitic = 1e-3;           // ohm
    double capacitance = 37.5;           // F
    double initial_cap_voltage = 0.0;    // V
    double turnoff_delay = 7.3e-6;       // s
    double blocking_voltage_limit = 6.5e3;  // V
    Integrator integrator = Integrator::ForwardEuler;

    bool operator==(const PlantSettings&) const = default;
};

struct ScenarioConfig {
    std::string name = "scenario";
    BusMode mode = BusMode::Ring;
    double initial_p = 70e6;      // W
    double initial_q = 5e6;       // var
    double charge_start = 5.0;    // s
    double sim_duration = 60.0;   // s
    double dt = 50e-6;            // s
    int decimation = 100;         // record every n-th step
    double watchdog_window = 5.0;  // s without bank-voltage progress
    double grace_window = 3.0;    // s of exciter settling after band tracking starts
    ControllerConfig controller;
    PlantSettings plant;

    /// Throws ConfigError or InfeasibleLimitsError.
    void validate() const;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Generation available to the charging bus.
double bus_rating(BusMode mode) noexcept;

struct CalibratedPlant {
    PlantParams params;
    PlantState initial;
};

/// Back-solves load resistance, filter compensation and exciter setpoint so
/// that the pre-charge steady state delivers initial_p and initial_q at the
/// configured bus voltage. In split-plant mode the charging bus carries half
/// of the operating point on half of the generation. Throws CalibrationError.
CalibratedPlant calibrate_operating_point(const ScenarioConfig& config);

struct TelemetryRecord {
    MetricSample sample;
    Phase phase = Phase::Idle;
    double duty = 0.0;
    double reference = 0.0;
    int attenuation_count = 0;
};

struct SummaryRow {
    std::string test_setting;
    bool empty = true;        // no samples inside the charging window
    bool completed = false;   // reached Done
    double max_metric = 0.0;  // V for M1 runs, var for M2 runs
    double min_metric = 0.0;
    double avg_metric = 0.0;
    bool band = false;
    double current_upper = 0.0;  // A, the fixed current for M1 runs
    double current_lower = 0.0;  // A, band floor for M2 runs
    double charging_time = 0.0;  // s

    bool operator==(const SummaryRow&) const = default;
};

/// Energy flows accumulated over the charging interval.
struct EnergyLedger {
    double from_bus = 0.0;        // integral of V_bus * I_in
    double into_capacitor = 0.0;  // integral of V_c * I_L
    double resistive_loss = 0.0;  // integral of R_par * I_L^2
    double cap_energy_start = 0.0;
    double cap_energy_end = 0.0;
    double inductor_energy_end = 0.0;
};

/// One controller invocation: the sample it saw and the command it issued.
struct ControlEvent {
    MetricSample sample;
    ChargeCommand command;
};

struct RunOptions {
    bool keep_control_trace = false;  // record every controller invocation
};

struct RunResult {
    std::vector<TelemetryRecord> telemetry;
    std::vector<ControlEvent> control_trace;
    SummaryRow summary;
    PlantState final_plant;
    ControllerState final_controller;
    std::optional<double> done_time;
    std::optional<double> band_start_time;
    std::optional<double> first_suspension_time;
    EnergyLedger energy;
    double max_m1_after_suspension = 0.0;
    double max_m2_after_grace = 0.0;
};

std::string default_test_setting(const ScenarioConfig& config);

RunResult run(const ScenarioConfig& config, const RunOptions& options = {});

/// Reduces telemetry to a summary row over [charge_start, done].
SummaryRow summarize(const std::vector<TelemetryRecord>& telemetry, const ScenarioConfig& config);

/// The four canonical charging cases: M1 at 0.6 and 0.8 kV, M2 at 6 and 10 Mvar.
std::vector<ScenarioConfig> canonical_scenarios();

}  // namespace dmc
