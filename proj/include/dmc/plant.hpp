#pragma once

// Average-value electrical model of one MVDC bus: generator EMF behind an
// effective reactance, rectifier, distribution line, lumped resistive load and
// the buck charger feeding the supercapacitor bank.
//
// The AC side is referred to the DC bus through the rectifier gain k:
//     I_ac = k * I_dc,   V_bus = k * (E - X_eff * I_ac) - (R_comm + R_line) * I_dc
// which is the magnitude-level relation V = E - X*I of the single-line model
// plus the rectifier commutation and cable drops. The network is algebraic;
// only the exciter, the effective reactance and the charger carry state.

#include "dmc/signals.hpp"
#include "dmc/switchgear.hpp"

#include <utility>

namespace dmc {

enum class BusMode { Ring, SplitPlant };

enum class Integrator { ForwardEuler, Heun };

struct GeneratorParams {
    double emf_nominal = 0.0;           // V (AC line quantity)
    double x_sync = 0.0;                // ohm
    double x_transient = 0.0;           // ohm
    double t_reactance_relax = 0.6;     // s
    double t_exciter = 1.0;             // s
    double avr_gain = 1.0;              // EMF volts per volt of terminal error
    double emf_ceiling = 0.0;           // V
    double v_terminal_setpoint = 0.0;   // V
    double rated_va = 82e6;             // VA

    /// Throws std::invalid_argument when an invariant does not hold.
    void validate() const;
};

struct GeneratorState {
    double emf = 0.0;
    double x_effective = 0.0;
    double q_output = 0.0;  // var
    double p_output = 0.0;  // W
    double last_disturbance_time = 0.0;
};

struct NetworkParams {
    double r_line = 0.005;             // ohm
    double r_load = 0.0;               // ohm, +inf for no load
    double r_commutation = 0.0;        // ohm, lossless rectifier overlap drop
    double rectifier_gain = 1.35;
    double q_compensation = 0.0;       // var supplied by AC-side filters
    double bus_rated_voltage = 5e3;    // V
    double disturbance_threshold = 0.05;  // relative admittance rise that resets X_eff
    BusMode mode = BusMode::Ring;

    void validate() const;
};

struct BuckState {
    double inductor_current = 0.0;  // A
    double duty = 0.0;
    double input_current = 0.0;     // A, duty * inductor current while gated
    double l_filter = 1e-3;         // H
    double r_parasitic = 1e-3;      // ohm
};

struct SupercapState {
    double capacitance = 37.5;  // F
    double voltage = 0.0;       // V

    double stored_energy() const noexcept { return 0.5 * capacitance * voltage * voltage; }
};

struct PlantParams {
    GeneratorParams generator;
    NetworkParams network;
    Integrator integrator = Integrator::ForwardEuler;
};

struct PlantState {
    double time = 0.0;
    long long step = 0;
    GeneratorState generator;
    double bus_voltage = 0.0;
    double bus_current = 0.0;
    double terminal_voltage = 0.0;   // AC terminal magnitude seen by the AVR
    double load_admittance = 0.0;    // S, previous step, for disturbance detection
    BuckState buck;
    SupercapState supercap;
    SwitchBank switches;
};

// Closed-form single-line relations.

/// |E / (jX + R_line + R_load)|. Throws std::domain_error on a zero denominator.
double steady_terminal_current(double emf, double x_g, double r_line, double r_load);

/// E - X * I, the magnitude-level bus voltage approximation.
double steady_bus_voltage(double emf, double x_g, double i_load);

/// |E / (jX_eff + R_line)|: the uncharged bank shorts the load out of the path.
double transient_charging_current(double emf, double x_eff, double r_line);

double supercap_energy(const SupercapState& cap) noexcept;

/// C = 2E / V^2. Throws std::domain_error when v_final is zero.
double required_capacitance(double energy, double v_final);

/// One explicit step of the averaged buck charger at fixed bus voltage.
/// With the gate off the duty is forced to zero and the inductor free-wheels
/// through the diode; its current never goes negative.
std::pair<BuckState, SupercapState> buck_average_step(BuckState buck, double v_bus, SupercapState cap,
                                                      bool gate_on, double dt,
                                                      Integrator integrator = Integrator::ForwardEuler);

/// Algebraic network solution for a given EMF, reactance and charger draw.
struct NetworkSolution {
    double bus_voltage;
    double bus_current;       // DC current delivered by the rectifier
    double terminal_voltage;  // AC magnitude
    double p_output;
    double q_output;
};

NetworkSolution solve_network(const NetworkParams& net, double emf, double x_eff, double i_charge);

/// Steady pre-charge state for the given parameters (gates open, bank at v_cap0).
PlantState make_steady_state(const PlantParams& params, SupercapState cap, BuckState buck,
                             SwitchBank switches);

/// Advances the plant by dt under the given command. S2 is held open; only
/// charging is simulated.
PlantState plant_step(const PlantState& state, const PlantParams& params, const ChargeCommand& command,
                      double dt);

MetricSample measure(const PlantState& state) noexcept;

}  // namespace dmc
