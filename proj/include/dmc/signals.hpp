#pragma once

// Quantities exchanged between the plant and the charging controller.

#include "dmc/switchgear.hpp"

namespace dmc {

/// Controller output for one control period.
struct ChargeCommand {
    GateCommand gate_s1 = GateCommand::Open;
    double current_reference = 0.0;  // A, 0 whenever the gate is open
    double duty = 0.0;               // buck duty cycle issued by the current tracker

    bool operator==(const ChargeCommand&) const = default;
};

/// Measurements the controller acts on.
struct MetricSample {
    double time = 0.0;      // s
    double v_bus = 0.0;     // V
    double q_mtg = 0.0;     // var
    double i_charge = 0.0;  // A, drawn from the bus by the charger
    double v_cap = 0.0;     // V
    double stored_energy = 0.0;  // J
};

}  // namespace dmc
