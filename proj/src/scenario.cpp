#include "dmc/scenario.hpp"

#include "dmc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace dmc {

namespace {

constexpr double kBusGeneration = 36e6 + 5e6;  // one MTG plus one ATG

std::string format_limit(double value, double scale, const char* unit) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g %s", value / scale, unit);
    return buf;
}

template <class E>
[[noreturn]] void rethrow_with_context(const E& e, double time) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " (t=%.6f s)", time);
    throw E(std::string(e.what()) + buf);
}

}  // namespace

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!(dt > 0.0)) fail("dt must be positive");
    if (!(sim_duration > 0.0)) fail("sim_duration must be positive");
    if (charge_start < 0.0 || charge_start > sim_duration) fail("charge_start must lie in [0, sim_duration]");
    if (decimation < 1) fail("decimation must be at least 1");
    if (!(watchdog_window > 0.0)) fail("watchdog_window must be positive");
    if (initial_p < 0.0) fail("initial_p must be non-negative");
    if (!(plant.bus_voltage > 0.0)) fail("bus_voltage must be positive");
    if (!(plant.x_transient > 0.0 && plant.x_transient < plant.x_sync)) fail("need 0 < x_transient < x_sync");
    if (!(plant.capacitance > 0.0)) fail("capacitance must be positive");
    if (!(plant.l_filter > 0.0)) fail("l_filter must be positive");
    if (plant.r_parasitic < 0.0) fail("r_parasitic must be non-negative");
    if (!(plant.emf_ceiling_ratio >= 1.0)) fail("emf_ceiling_ratio must be at least 1");
    if (!(plant.turnoff_delay >= 0.0)) fail("turnoff_delay must be non-negative");
    if (!(plant.blocking_voltage_limit > 0.0)) fail("blocking_voltage_limit must be positive");
    controller.validate();
}

double bus_rating(BusMode mode) noexcept {
    return mode == BusMode::Ring ? 2.0 * kBusGeneration : kBusGeneration;
}

CalibratedPlant calibrate_operating_point(const ScenarioConfig& config) {
    config.validate();
    const PlantSettings& ps = config.plant;

    // Split plant: the charging bus is one of two identical halves.
    const bool split = config.mode == BusMode::SplitPlant;
    const double share = split ? 0.5 : 1.0;
    const double p0 = config.initial_p * share;
    const double q0 = config.initial_q * share;
    const double rating = split ? kBusGeneration : bus_rating(BusMode::Ring);
    if (p0 > rating) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "operating point infeasible: %.4g MW requested on a bus rated %.4g MW", p0 / 1e6,
                      rating / 1e6);
        throw CalibrationError(buf);
    }

    NetworkParams net;
    net.mode = config.mode;
    net.rectifier_gain = ps.rectifier_gain;
    net.r_line = ps.r_line;
    net.r_commutation = ps.r_commutation / share;
    net.disturbance_threshold = ps.disturbance_threshold;
    net.bus_rated_voltage = 5e3;

    GeneratorParams gen;
    gen.x_sync = ps.x_sync / share;
    gen.x_transient = ps.x_transient / share;
    gen.t_reactance_relax = ps.t_reactance_relax;
    gen.t_exciter = ps.t_exciter;
    gen.avr_gain = ps.avr_gain;
    gen.rated_va = rating;

    const double v0 = ps.bus_voltage;
    const double k = ps.rectifier_gain;
    // (V0 + R_line * I) * I = P0
    double i0 = 0.0;
    if (p0 > 0.0) {
        i0 = net.r_line > 0.0 ? (-v0 + std::sqrt(v0 * v0 + 4.0 * net.r_line * p0)) / (2.0 * net.r_line)
                              : p0 / v0;
        net.r_load = v0 / i0;
    } else {
        net.r_load = std::numeric_limits<double>::infinity();
    }
    const double i_ac = k * i0;
    const double terminal = (v0 + (net.r_commutation + net.r_line) * i0) / k;
    gen.v_terminal_setpoint = terminal;
    gen.emf_nominal = terminal + gen.x_sync * i_ac;
    gen.emf_ceiling = ps.emf_ceiling_ratio * gen.emf_nominal;
    net.q_compensation = gen.x_sync * i_ac * i_ac - q0;

    gen.validate();
    net.validate();

    CalibratedPlant out;
    out.params.generator = gen;
    out.params.network = net;
    out.params.integrator = ps.integrator;

    BuckState buck;
    buck.l_filter = ps.l_filter;
    buck.r_parasitic = ps.r_parasitic;
    SupercapState cap;
    cap.capacitance = ps.capacitance;
    cap.voltage = ps.initial_cap_voltage;
    out.initial = make_steady_state(out.params, cap, buck,
                                    make_switch_bank(ps.turnoff_delay, ps.blocking_voltage_limit));

    // Check the back-solve against the network solution.
    const double tol = 5e-3;
    const auto off = [tol](double got, double want, double scale) {
        return std::abs(got - want) > tol * std::max(std::abs(want), scale);
    };
    const GeneratorState& g = out.initial.generator;
    if (off(out.initial.bus_voltage, v0, 1.0) || off(g.p_output, p0, 1e3) || off(g.q_output, q0, 1e3)) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "calibration missed: achieved %.6g V, %.6g W, %.6g var",
                      out.initial.bus_voltage, g.p_output, g.q_output);
        throw CalibrationError(buf);
    }
    return out;
}

std::string default_test_setting(const ScenarioConfig& config) {
    const Limits& lim = config.controller.limits;
    if (config.controller.mode == ControlMode::M1) return "M1_limit=" + format_limit(lim.m1_limit, 1e3, "kV");
    return "M2_limit=" + format_limit(lim.q_limit, 1e6, "Mvar");
}

RunResult run(const ScenarioConfig& config, const RunOptions& options) {
    const CalibratedPlant plant = calibrate_operating_point(config);
    const ControllerConfig& ccfg = config.controller;
    const double dt = config.dt;

    const long long n_steps = std::llround(config.sim_duration / dt);
    const long long charge_step = std::llround(config.charge_start / dt);
    const long long ctrl_every = std::max(1LL, std::llround(ccfg.limits.control_period / dt));

    RunResult result;
    PlantState state = plant.initial;
    ControllerState ctrl;
    ChargeCommand cmd;

    auto record = [&](const PlantState& s) {
        TelemetryRecord r;
        r.sample = measure(s);
        r.phase = ctrl.phase;
        r.duty = s.buck.duty;
        r.reference = cmd.current_reference;
        r.attenuation_count = ctrl.attenuation_count;
        result.telemetry.push_back(r);
    };
    result.telemetry.reserve(static_cast<std::size_t>(n_steps / config.decimation + 64));
    record(state);

    double progress_voltage = state.supercap.voltage;
    double progress_time = config.charge_start;
    EnergyLedger& energy = result.energy;
    energy.cap_energy_start = state.supercap.stored_energy();
    const double r_par = state.buck.r_parasitic;

    for (long long n = 0; n < n_steps; ++n) {
        const bool engaged = n >= charge_step;
        const Phase before = ctrl.phase;
        if (engaged && ctrl.phase != Phase::Done && (n - charge_step) % ctrl_every == 0) {
            const MetricSample sample = measure(state);
            try {
                const ControllerStep step = controller_step(ctrl, sample, ccfg);
                ctrl = step.state;
                cmd = step.command;
                if (options.keep_control_trace) result.control_trace.push_back({sample, cmd});
            } catch (const InfeasibleLimitsError& e) {
                rethrow_with_context(e, state.time);
            } catch (const NonConvergenceError& e) {
                rethrow_with_context(e, state.time);
            }
            if (ctrl.phase == Phase::Suspended && !result.first_suspension_time) {
                result.first_suspension_time = state.time;
            }
            if (ctrl.phase == Phase::BandTracking && !result.band_start_time) {
                result.band_start_time = state.time;
            }
            if (ctrl.phase == Phase::Done && !result.done_time) result.done_time = state.time;
        }

        PlantState next = plant_step(state, plant.params, cmd, dt);

        const double i_l = state.buck.inductor_current;
        energy.from_bus += next.bus_voltage * next.buck.input_current * dt;
        energy.into_capacitor += i_l * 0.5 * (state.supercap.voltage + next.supercap.voltage) * dt;
        energy.resistive_loss += r_par * i_l * i_l * dt;

        if (engaged) {
            const MetricSample m = measure(next);
            const Metrics metric = compute_metrics(m, ccfg.limits);
            if (result.first_suspension_time) {
                result.max_m1_after_suspension = std::max(result.max_m1_after_suspension, metric.m1);
            }
            if (result.band_start_time && next.time >= *result.band_start_time + config.grace_window) {
                result.max_m2_after_grace = std::max(result.max_m2_after_grace, metric.m2);
            }
            if (ctrl.phase == Phase::Done) {
                progress_time = next.time;
            } else if (next.supercap.voltage > progress_voltage + 1e-3) {
                progress_voltage = next.supercap.voltage;
                progress_time = next.time;
            } else if (next.time - progress_time > config.watchdog_window) {
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              "charging stalled: bank voltage %.3f V unchanged for %.3g s (t=%.6f s, phase %s)",
                              next.supercap.voltage, config.watchdog_window, next.time,
                              std::string(to_string(ctrl.phase)).c_str());
                throw StalledRunError(buf);
            }
        }

        state = next;
        if ((n + 1) % config.decimation == 0 || ctrl.phase != before) record(state);
    }

    energy.cap_energy_end = state.supercap.stored_energy();
    energy.inductor_energy_end = 0.5 * state.buck.l_filter * state.buck.inductor_current *
                                 state.buck.inductor_current;
    result.final_plant = state;
    result.final_controller = ctrl;
    result.summary = summarize(result.telemetry, config);
    return result;
}

SummaryRow summarize(const std::vector<TelemetryRecord>& telemetry, const ScenarioConfig& config) {
    SummaryRow row;
    row.test_setting = config.name.empty() ? default_test_setting(config) : config.name;
    row.band = config.controller.mode == ControlMode::M2;

    std::optional<double> done;
    for (const TelemetryRecord& r : telemetry) {
        if (r.phase == Phase::Done) {
            done = r.sample.time;
            break;
        }
    }
    const double end = done.value_or(std::numeric_limits<double>::infinity());
    const Phase tracking = row.band ? Phase::BandTracking : Phase::FixedTracking;

    double sum = 0.0;
    std::size_t count = 0;
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    double last_time = config.charge_start;
    for (const TelemetryRecord& r : telemetry) {
        const double t = r.sample.time;
        if (t <= config.charge_start || t > end) continue;
        const double metric = row.band ? r.sample.q_mtg : r.sample.v_bus;
        hi = std::max(hi, metric);
        lo = std::min(lo, metric);
        sum += metric;
        ++count;
        last_time = t;
        if (r.phase == tracking) row.current_upper = std::max(row.current_upper, r.reference);
    }
    if (count == 0) return row;

    row.empty = false;
    row.max_metric = hi;
    row.min_metric = lo;
    row.avg_metric = std::clamp(sum / static_cast<double>(count), lo, hi);
    if (row.band) row.current_lower = config.controller.limits.band_coefficient * row.current_upper;
    row.completed = done.has_value();
    row.charging_time = (done ? *done : last_time) - config.charge_start;
    return row;
}

std::vector<ScenarioConfig> canonical_scenarios() {
    std::vector<ScenarioConfig> out;

    ScenarioConfig m1;
    m1.controller.mode = ControlMode::M1;
    m1.sim_duration = 60.0;

    ScenarioConfig a = m1;
    a.name = "M1_limit=0.6 kV";
    a.controller.limits.m1_limit = 600.0;
    a.controller.limits.m1_alert = 595.0;
    out.push_back(a);

    ScenarioConfig b = m1;
    b.name = "M1_limit=0.8 kV";
    b.controller.limits.m1_limit = 800.0;
    b.controller.limits.m1_alert = 795.0;
    out.push_back(b);

    ScenarioConfig m2;
    m2.controller.mode = ControlMode::M2;
    m2.controller.limits.attenuation = 0.95;

    ScenarioConfig c = m2;
    c.name = "M2_limit=6 Mvar";
    c.controller.limits.q_limit = 6e6;
    c.controller.limits.q_alert = 5.8e6;
    c.sim_duration = 180.0;
    out.push_back(c);

    ScenarioConfig d = m2;
    d.name = "M2_limit=10 Mvar";
    d.controller.limits.q_limit = 10e6;
    d.controller.limits.q_alert = 9.5e6;
    d.sim_duration = 90.0;
    out.push_back(d);
    return out;
}

}  // namespace dmc
