#include "dmc/plant.hpp"

#include "dmc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace dmc {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

void require_finite(double v, const char* name, const PlantState& s) {
    if (!std::isfinite(v)) throw NumericError(name, s.step, s.time);
}

double load_conductance(const NetworkParams& net) {
    return std::isinf(net.r_load) ? 0.0 : 1.0 / net.r_load;
}

}  // namespace

void GeneratorParams::validate() const {
    require(x_transient > 0.0 && x_transient < x_sync, "generator: need 0 < x_transient < x_sync");
    require(t_reactance_relax > 0.0 && t_exciter > 0.0, "generator: time constants must be positive");
    require(emf_ceiling >= emf_nominal, "generator: emf_ceiling below emf_nominal");
    require(avr_gain >= 0.0, "generator: avr_gain must be non-negative");
}

void NetworkParams::validate() const {
    require(rectifier_gain > 0.0, "network: rectifier_gain must be positive");
    require(r_line >= 0.0 && r_commutation >= 0.0, "network: resistances must be non-negative");
    require(r_load > 0.0, "network: r_load must be positive");
    require(disturbance_threshold > 0.0, "network: disturbance_threshold must be positive");
}

double steady_terminal_current(double emf, double x_g, double r_line, double r_load) {
    const std::complex<double> z(r_line + r_load, x_g);
    if (std::abs(z) == 0.0) throw std::domain_error("steady_terminal_current: zero impedance");
    return std::abs(std::complex<double>(emf, 0.0) / z);
}

double steady_bus_voltage(double emf, double x_g, double i_load) { return emf - x_g * i_load; }

double transient_charging_current(double emf, double x_eff, double r_line) {
    const std::complex<double> z(r_line, x_eff);
    if (std::abs(z) == 0.0) throw std::domain_error("transient_charging_current: zero impedance");
    if (std::isinf(std::abs(z))) return 0.0;
    return std::abs(std::complex<double>(emf, 0.0) / z);
}

double supercap_energy(const SupercapState& cap) noexcept { return cap.stored_energy(); }

double required_capacitance(double energy, double v_final) {
    if (v_final == 0.0) throw std::domain_error("required_capacitance: zero final voltage");
    return 2.0 * energy / (v_final * v_final);
}

std::pair<BuckState, SupercapState> buck_average_step(BuckState buck, double v_bus, SupercapState cap,
                                                      bool gate_on, double dt, Integrator integrator) {
    if (!gate_on) buck.duty = 0.0;
    const double d = std::clamp(buck.duty, 0.0, 1.0);
    const double L = buck.l_filter;
    const double R = buck.r_parasitic;
    const double C = cap.capacitance;

    auto di = [&](double i, double vc) { return (d * v_bus - vc - R * i) / L; };

    const double i0 = buck.inductor_current;
    const double v0 = cap.voltage;
    double i1 = 0.0;
    double v1 = 0.0;
    if (integrator == Integrator::Heun) {
        const double ip = std::max(0.0, i0 + dt * di(i0, v0));
        const double vp = v0 + dt * i0 / C;
        i1 = i0 + 0.5 * dt * (di(i0, v0) + di(ip, vp));
        v1 = v0 + 0.5 * dt * (i0 + ip) / C;
    } else {
        i1 = i0 + dt * di(i0, v0);
        v1 = v0 + dt * i0 / C;
    }
    // The diode blocks reverse inductor current.
    buck.inductor_current = std::max(0.0, i1);
    buck.input_current = d * i0;
    cap.voltage = std::max(v0, v1);
    return {buck, cap};
}

NetworkSolution solve_network(const NetworkParams& net, double emf, double x_eff, double i_charge) {
    const double k = net.rectifier_gain;
    const double g = load_conductance(net);
    const double r_series = k * k * x_eff + net.r_commutation + net.r_line;
    double v = (k * emf - r_series * i_charge) / (1.0 + r_series * g);
    v = std::max(0.0, v);
    const double i_dc = v * g + i_charge;
    const double i_ac = k * i_dc;

    NetworkSolution sol{};
    sol.bus_voltage = v;
    sol.bus_current = i_dc;
    sol.terminal_voltage = std::max(0.0, emf - x_eff * i_ac);
    sol.p_output = (v + net.r_line * i_dc) * i_dc;
    // imag(E * conj(I)) with the rectifier drawing in phase with the terminal
    // voltage, less what the AC filters supply.
    sol.q_output = x_eff * i_ac * i_ac - net.q_compensation;
    return sol;
}

PlantState make_steady_state(const PlantParams& params, SupercapState cap, BuckState buck,
                             SwitchBank switches) {
    PlantState s;
    s.generator.emf = params.generator.emf_nominal;
    s.generator.x_effective = params.generator.x_sync;
    const NetworkSolution sol = solve_network(params.network, s.generator.emf, s.generator.x_effective, 0.0);
    s.generator.p_output = sol.p_output;
    s.generator.q_output = sol.q_output;
    s.bus_voltage = sol.bus_voltage;
    s.bus_current = sol.bus_current;
    s.terminal_voltage = sol.terminal_voltage;
    s.load_admittance = load_conductance(params.network);
    buck.duty = 0.0;
    buck.input_current = 0.0;
    s.buck = buck;
    s.supercap = cap;
    s.switches = switches;
    return s;
}

PlantState plant_step(const PlantState& state, const PlantParams& params, const ChargeCommand& command,
                      double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("plant_step: dt must be positive");
    const GeneratorParams& gen = params.generator;
    const NetworkParams& net = params.network;

    PlantState next = state;
    const double t0 = state.time;

    // Gates: S2 stays open while charging.
    next.switches = apply_gate(state.switches, command.gate_s1, GateCommand::Open, t0).bank;
    const double on_fraction = conduction_fraction(next.switches.s1, t0, dt);
    const bool gate_on = on_fraction > 0.0;

    next.buck.duty = gate_on ? std::clamp(command.duty, 0.0, 1.0) * on_fraction : 0.0;
    const double i_charge = next.buck.duty * state.buck.inductor_current;

    // An admittance increase beyond the threshold is a new disturbance.
    const double v_prev = std::max(state.bus_voltage, 1.0);
    const double admittance = load_conductance(net) + i_charge / v_prev;
    const double y_ref = std::max(state.load_admittance, std::numeric_limits<double>::min());
    double x_eff = state.generator.x_effective;
    if (admittance - state.load_admittance > net.disturbance_threshold * y_ref) {
        x_eff = gen.x_transient;
        next.generator.last_disturbance_time = t0;
    }
    next.load_admittance = admittance;

    const NetworkSolution sol = solve_network(net, state.generator.emf, x_eff, i_charge);
    next.bus_voltage = sol.bus_voltage;
    next.bus_current = sol.bus_current;
    next.terminal_voltage = sol.terminal_voltage;
    next.generator.p_output = sol.p_output;
    next.generator.q_output = sol.q_output;

    auto [buck, cap] = buck_average_step(next.buck, sol.bus_voltage, state.supercap, gate_on, dt,
                                         params.integrator);
    next.buck = buck;
    next.supercap = cap;

    // Exciter: first-order lag toward the EMF that restores the terminal setpoint.
    const double emf_target = std::clamp(
        gen.emf_nominal + gen.avr_gain * (gen.v_terminal_setpoint - sol.terminal_voltage), 0.0,
        gen.emf_ceiling);
    next.generator.emf = state.generator.emf + dt / gen.t_exciter * (emf_target - state.generator.emf);
    next.generator.emf = std::min(next.generator.emf, gen.emf_ceiling);

    // Effective reactance relaxes toward the synchronous value.
    next.generator.x_effective = gen.x_sync + (x_eff - gen.x_sync) * std::exp(-dt / gen.t_reactance_relax);

    // Blocking voltages: with S1 open the diode clamps the switch node to
    // ground while the inductor carries current, otherwise it floats at V_c.
    const double v_s1 = buck.inductor_current > 0.0 ? sol.bus_voltage
                                                    : std::max(0.0, sol.bus_voltage - cap.voltage);
    next.switches = check_blocking(next.switches, v_s1, cap.voltage);

    next.time = t0 + dt;
    next.step = state.step + 1;

    require_finite(next.bus_voltage, "bus_voltage", next);
    require_finite(next.generator.emf, "emf", next);
    require_finite(next.generator.q_output, "q_output", next);
    require_finite(next.buck.inductor_current, "inductor_current", next);
    require_finite(next.supercap.voltage, "supercap_voltage", next);
    return next;
}

MetricSample measure(const PlantState& state) noexcept {
    MetricSample m;
    m.time = state.time;
    m.v_bus = state.bus_voltage;
    m.q_mtg = state.generator.q_output;
    m.i_charge = state.buck.input_current;
    m.v_cap = state.supercap.voltage;
    m.stored_energy = state.supercap.stored_energy();
    return m;
}

}  // namespace dmc
