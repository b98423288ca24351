#pragma once

// Disturbance metric control of the supercapacitor charger.
//
// Two metrics are watched while charging:
//   m1 = |V_bus,lim - V_bus|   (bus voltage deviation)
//   m2 = Q_MTG                 (generator reactive output)
// and each has its own procedure. Both are pure step functions over a
// ControllerState value, called once per control period.

#include "dmc/signals.hpp"

#include <string_view>

namespace dmc {

enum class ControlMode { M1, M2 };

enum class Phase { Idle, Probing, Suspended, FixedTracking, BandTracking, Done };

std::string_view to_string(Phase phase) noexcept;
/// Throws std::invalid_argument for unknown names.
Phase phase_from_string(std::string_view name);

struct Limits {
    double v_bus_limit = 5e3;          // V
    double m1_limit = 800.0;           // V
    double m1_alert = 795.0;           // V
    double q_limit = 10e6;             // var
    double q_alert = 9.5e6;            // var
    double attenuation = 0.95;
    double band_coefficient = 0.9;
    double target_cap_voltage = 4e3;   // V
    double control_period = 50e-6;    // s

    /// Throws InfeasibleLimitsError when alerts are not strictly inside their
    /// limits or a coefficient is outside (0, 1).
    void validate(ControlMode mode) const;

    bool operator==(const Limits&) const = default;
};

struct TrackerGains {
    double kp = 2e-6;  // duty per amp
    double ki = 0.2;   // duty per amp-second

    bool operator==(const TrackerGains&) const = default;
};

struct ControllerConfig {
    ControlMode mode = ControlMode::M1;
    Limits limits;
    TrackerGains gains;
    double probe_slew = 5e3;          // A/s
    double m2_monitor_window = 1.0;   // s, suspension time spent watching m2
    int attenuation_cap = 50;
    double capture_tolerance = 5e-3;  // relative, re-probe reaching the revised maximum

    void validate() const;

    bool operator==(const ControllerConfig&) const = default;
};

struct ControllerState {
    Phase phase = Phase::Idle;
    double i_max_recorded = 0.0;   // A, 0 until the first suspension
    double i_lower = 0.0;          // A
    double tracking_ref = 0.0;     // A, reference currently issued
    int attenuation_count = 0;
    double integrator = 0.0;       // tracker integral term, duty units
    double duty = 0.0;
    double phase_started = 0.0;    // s
    double suspend_peak_m2 = 0.0;  // var
    bool has_recorded_max = false;

    bool operator==(const ControllerState&) const = default;
};

struct Metrics {
    double m1;
    double m2;
};

Metrics compute_metrics(const MetricSample& sample, const Limits& limits) noexcept;

struct ControllerStep {
    ControllerState state;
    ChargeCommand command;
};

/// Bus-voltage procedure: probe, suspend at the alert and record the current,
/// then track that current until the bank reaches its target voltage.
ControllerStep dmc_m1_step(const ControllerState& ctrl, const MetricSample& sample,
                           const ControllerConfig& cfg);

/// Reactive-power procedure: probe, suspend at the alert and record the
/// current, attenuate it while m2 overshoots the limit during suspension,
/// then hold the current inside [band_coefficient * i_max, i_max].
ControllerStep dmc_m2_step(const ControllerState& ctrl, const MetricSample& sample,
                           const ControllerConfig& cfg);

/// Dispatches on cfg.mode.
ControllerStep controller_step(const ControllerState& ctrl, const MetricSample& sample,
                               const ControllerConfig& cfg);

struct TrackerOutput {
    double duty;
    double integrator;
};

/// PI law from current error to buck duty, clamped to [0, 1]. The integrator
/// only accumulates when doing so does not push further into saturation.
TrackerOutput current_tracker(double reference, double measured, const ControllerState& ctrl,
                              const TrackerGains& gains, double dt) noexcept;

/// Next probing reference: linear slew, capped at the recorded maximum.
double probe_ramp(const ControllerState& ctrl, const ControllerConfig& cfg, double dt) noexcept;

}  // namespace dmc
