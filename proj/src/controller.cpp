#include "dmc/controller.hpp"

#include "dmc/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dmc {

namespace {

constexpr std::array<std::pair<Phase, std::string_view>, 6> kPhaseNames{{
    {Phase::Idle, "Idle"},
    {Phase::Probing, "Probing"},
    {Phase::Suspended, "Suspended"},
    {Phase::FixedTracking, "FixedTracking"},
    {Phase::BandTracking, "BandTracking"},
    {Phase::Done, "Done"},
}};

ChargeCommand open_gate() { return ChargeCommand{GateCommand::Open, 0.0, 0.0}; }

ControllerStep enter(ControllerState s, Phase phase, double now, ChargeCommand cmd) {
    s.phase = phase;
    s.phase_started = now;
    s.tracking_ref = cmd.current_reference;
    s.duty = cmd.duty;
    return {s, cmd};
}

ControllerStep finish(ControllerState s, double now) {
    s.integrator = 0.0;
    return enter(s, Phase::Done, now, open_gate());
}

// Emits a closed-gate command tracking `reference`.
ControllerStep track(ControllerState s, double reference, const MetricSample& sample,
                     const ControllerConfig& cfg) {
    const TrackerOutput out =
        current_tracker(reference, sample.i_charge, s, cfg.gains, cfg.limits.control_period);
    s.integrator = out.integrator;
    s.tracking_ref = reference;
    s.duty = out.duty;
    return {s, ChargeCommand{GateCommand::Closed, reference, out.duty}};
}

ControllerStep suspend(ControllerState s, const MetricSample& sample, double m2) {
    s.suspend_peak_m2 = m2;
    return enter(s, Phase::Suspended, sample.time, open_gate());
}

ControllerStep start_probing(ControllerState s, const MetricSample& sample, bool reset_integrator) {
    if (reset_integrator) s.integrator = 0.0;
    return enter(s, Phase::Probing, sample.time, ChargeCommand{GateCommand::Closed, 0.0, s.integrator});
}

}  // namespace

std::string_view to_string(Phase phase) noexcept {
    for (const auto& [p, name] : kPhaseNames) {
        if (p == phase) return name;
    }
    return "Unknown";
}

Phase phase_from_string(std::string_view name) {
    for (const auto& [p, n] : kPhaseNames) {
        if (n == name) return p;
    }
    throw std::invalid_argument("unknown controller phase '" + std::string(name) + "'");
}

void Limits::validate(ControlMode mode) const {
    auto fail = [](const std::string& msg) { throw InfeasibleLimitsError(msg); };
    if (mode == ControlMode::M1) {
        if (!(m1_limit > 0.0)) fail("m1_limit must be positive");
        if (!(m1_alert > 0.0 && m1_alert < m1_limit)) fail("m1_alert must lie strictly inside (0, m1_limit)");
    } else {
        if (!(q_limit > 0.0)) fail("q_limit must be positive");
        if (!(q_alert < q_limit)) fail("q_alert must be strictly below q_limit");
    }
    if (!(attenuation > 0.0 && attenuation < 1.0)) fail("attenuation must lie in (0, 1)");
    if (!(band_coefficient > 0.0 && band_coefficient < 1.0)) fail("band_coefficient must lie in (0, 1)");
    if (!(target_cap_voltage > 0.0)) fail("target_cap_voltage must be positive");
    if (!(control_period > 0.0)) fail("control_period must be positive");
}

void ControllerConfig::validate() const {
    limits.validate(mode);
    if (!(probe_slew > 0.0)) throw InfeasibleLimitsError("probe_slew must be positive");
    if (!(m2_monitor_window >= 0.0)) throw InfeasibleLimitsError("m2_monitor_window must be non-negative");
    if (attenuation_cap < 0) throw InfeasibleLimitsError("attenuation_cap must be non-negative");
}

Metrics compute_metrics(const MetricSample& sample, const Limits& limits) noexcept {
    return Metrics{std::abs(limits.v_bus_limit - sample.v_bus), sample.q_mtg};
}

TrackerOutput current_tracker(double reference, double measured, const ControllerState& ctrl,
                              const TrackerGains& gains, double dt) noexcept {
    const double error = reference - measured;
    const double increment = gains.ki * error * dt;
    const double unclamped = gains.kp * error + ctrl.integrator + increment;

    double integrator = ctrl.integrator;
    const bool pushing_high = unclamped > 1.0 && error > 0.0;
    const bool pushing_low = unclamped < 0.0 && error < 0.0;
    if (!pushing_high && !pushing_low) integrator += increment;
    integrator = std::clamp(integrator, 0.0, 1.0);

    return TrackerOutput{std::clamp(unclamped, 0.0, 1.0), integrator};
}

double probe_ramp(const ControllerState& ctrl, const ControllerConfig& cfg, double dt) noexcept {
    double next = ctrl.tracking_ref + cfg.probe_slew * dt;
    if (ctrl.has_recorded_max) next = std::min(next, ctrl.i_max_recorded);
    return next;
}

ControllerStep dmc_m1_step(const ControllerState& ctrl, const MetricSample& sample,
                           const ControllerConfig& cfg) {
    const Limits& lim = cfg.limits;
    const Metrics m = compute_metrics(sample, lim);
    const bool charged = sample.v_cap >= lim.target_cap_voltage;
    ControllerState s = ctrl;

    switch (s.phase) {
        case Phase::Idle:
            if (charged) return finish(s, sample.time);
            if (m.m1 >= lim.m1_alert) {
                throw InfeasibleLimitsError("bus voltage deviation " + std::to_string(m.m1) +
                                            " V already at or above the alert value before charging");
            }
            return start_probing(s, sample, true);

        case Phase::Probing:
            if (charged) return finish(s, sample.time);
            if (m.m1 >= lim.m1_alert) {
                s.i_max_recorded = sample.i_charge;
                s.has_recorded_max = true;
                return suspend(s, sample, m.m2);
            }
            return track(s, probe_ramp(s, cfg, lim.control_period), sample, cfg);

        case Phase::Suspended: {
            // Charging stays stopped for one control period, then the recorded
            // current becomes the fixed reference.
            auto out = track(s, s.i_max_recorded, sample, cfg);
            out.state.phase = Phase::FixedTracking;
            out.state.phase_started = sample.time;
            return out;
        }

        case Phase::FixedTracking:
            if (charged) return finish(s, sample.time);
            return track(s, s.i_max_recorded, sample, cfg);

        case Phase::BandTracking:
        case Phase::Done:
            break;
    }
    return {s, open_gate()};
}

ControllerStep dmc_m2_step(const ControllerState& ctrl, const MetricSample& sample,
                           const ControllerConfig& cfg) {
    const Limits& lim = cfg.limits;
    const Metrics m = compute_metrics(sample, lim);
    const bool charged = sample.v_cap >= lim.target_cap_voltage;
    ControllerState s = ctrl;

    switch (s.phase) {
        case Phase::Idle:
            if (charged) return finish(s, sample.time);
            if (m.m2 >= lim.q_alert) {
                throw InfeasibleLimitsError("generator reactive output " + std::to_string(m.m2) +
                                            " var already at or above the alert value before charging");
            }
            return start_probing(s, sample, true);

        case Phase::Probing:
            if (charged) return finish(s, sample.time);
            if (!s.has_recorded_max) {
                if (m.m2 >= lim.q_alert) {
                    s.i_max_recorded = sample.i_charge;
                    s.has_recorded_max = true;
                    return suspend(s, sample, m.m2);
                }
            } else if (sample.i_charge >= s.i_max_recorded * (1.0 - cfg.capture_tolerance)) {
                return suspend(s, sample, m.m2);
            }
            return track(s, probe_ramp(s, cfg, lim.control_period), sample, cfg);

        case Phase::Suspended:
            s.suspend_peak_m2 = std::max(s.suspend_peak_m2, m.m2);
            if (m.m2 > lim.q_limit) {
                s.i_max_recorded *= lim.attenuation;
                ++s.attenuation_count;
                if (s.attenuation_count > cfg.attenuation_cap) {
                    throw NonConvergenceError("reactive power still above its limit after " +
                                              std::to_string(s.attenuation_count) + " attenuations");
                }
                // Resume from zero so the disturbance being measured is not re-injected.
                s.tracking_ref = 0.0;
                return start_probing(s, sample, true);
            }
            if (sample.time - s.phase_started >= cfg.m2_monitor_window) {
                s.i_lower = lim.band_coefficient * s.i_max_recorded;
                auto out = track(s, s.i_max_recorded, sample, cfg);
                out.state.phase = Phase::BandTracking;
                out.state.phase_started = sample.time;
                return out;
            }
            return {s, open_gate()};

        case Phase::BandTracking: {
            if (charged) return finish(s, sample.time);
            double reference = s.tracking_ref;
            if (sample.i_charge >= s.i_max_recorded) {
                reference = s.i_lower;
            } else if (sample.i_charge <= s.i_lower) {
                reference = s.i_max_recorded;
            }
            return track(s, reference, sample, cfg);
        }

        case Phase::FixedTracking:
        case Phase::Done:
            break;
    }
    return {s, open_gate()};
}

ControllerStep controller_step(const ControllerState& ctrl, const MetricSample& sample,
                               const ControllerConfig& cfg) {
    return cfg.mode == ControlMode::M1 ? dmc_m1_step(ctrl, sample, cfg) : dmc_m2_step(ctrl, sample, cfg);
}

}  // namespace dmc
