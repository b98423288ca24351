#pragma once

// Fast IGBT gates of the charging circuit: S1 feeds the buck charger from the
// bus, S2 connects the supercapacitor to the pulsed load. Both are modelled by
// their turn-off delay, blocking-voltage rating and a mutual-exclusion
// interlock.

#include <cstdint>
#include <optional>

namespace dmc {

enum class GateCommand { Open, Closed };

enum class Conduction { Open, Closed, TurningOff };

struct SwitchState {
    GateCommand commanded = GateCommand::Open;
    Conduction actual = Conduction::Open;
    double turnoff_deadline = 0.0;          // s
    double blocking_voltage_limit = 6.5e3;  // V
    double turnoff_delay = 7.3e-6;          // s
    double peak_blocking_voltage = 0.0;     // V, largest seen while open

    bool conducting() const noexcept { return actual != Conduction::Open; }
};

struct SwitchBank {
    SwitchState s1;
    SwitchState s2;
    std::uint64_t interlock_rejections = 0;
};

enum class SwitchId { S1, S2 };

/// Diagnostic emitted when a close command is refused by the interlock.
struct InterlockEvent {
    double time;
    SwitchId rejected;
};

struct GateOutcome {
    SwitchBank bank;
    std::optional<InterlockEvent> event;
};

SwitchBank make_switch_bank(double turnoff_delay = 7.3e-6, double blocking_voltage_limit = 6.5e3);

/// Completes any turn-off whose deadline has passed.
SwitchBank advance(SwitchBank bank, double now);

/// Applies gate commands at time `now`. Closing is immediate; opening leaves
/// the switch conducting for `turnoff_delay`. A close request for one switch
/// while the other is not fully open is rejected and reported, S1 first.
GateOutcome apply_gate(SwitchBank bank, GateCommand s1_cmd, GateCommand s2_cmd, double now);

/// Fraction of [t0, t0 + dt] during which the switch conducts.
double conduction_fraction(const SwitchState& sw, double t0, double dt) noexcept;

/// Records peak blocking voltage on each open switch. Throws OverstressError
/// when an open switch sees more than its rating.
SwitchBank check_blocking(SwitchBank bank, double v_across_s1, double v_across_s2);

}  // namespace dmc
