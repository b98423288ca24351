#include "dmc/switchgear.hpp"

#include "dmc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dmc {

namespace {

SwitchState advance_one(SwitchState sw, double now) {
    if (sw.actual == Conduction::TurningOff && now >= sw.turnoff_deadline) {
        sw.actual = Conduction::Open;
    }
    return sw;
}

void command_open(SwitchState& sw, double now) {
    sw.commanded = GateCommand::Open;
    if (sw.actual == Conduction::Closed) {
        sw.actual = Conduction::TurningOff;
        sw.turnoff_deadline = now + sw.turnoff_delay;
    }
}

SwitchState observe_blocking(SwitchState sw, double v, const char* name) {
    if (sw.conducting()) return sw;
    const double mag = std::abs(v);
    sw.peak_blocking_voltage = std::max(sw.peak_blocking_voltage, mag);
    if (mag > sw.blocking_voltage_limit) {
        throw OverstressError(name, mag, sw.blocking_voltage_limit);
    }
    return sw;
}

}  // namespace

SwitchBank make_switch_bank(double turnoff_delay, double blocking_voltage_limit) {
    SwitchBank bank;
    for (SwitchState* sw : {&bank.s1, &bank.s2}) {
        sw->turnoff_delay = turnoff_delay;
        sw->blocking_voltage_limit = blocking_voltage_limit;
    }
    return bank;
}

SwitchBank advance(SwitchBank bank, double now) {
    bank.s1 = advance_one(bank.s1, now);
    bank.s2 = advance_one(bank.s2, now);
    return bank;
}

GateOutcome apply_gate(SwitchBank bank, GateCommand s1_cmd, GateCommand s2_cmd, double now) {
    bank = advance(bank, now);
    GateOutcome out;

    // Openings first so that a simultaneous swap is still refused until the
    // other device has finished turning off.
    if (s1_cmd == GateCommand::Open) command_open(bank.s1, now);
    if (s2_cmd == GateCommand::Open) command_open(bank.s2, now);

    auto try_close = [&](SwitchState& self, const SwitchState& other, SwitchId id) {
        if (self.actual == Conduction::Closed) {
            self.commanded = GateCommand::Closed;
            return;
        }
        if (other.conducting()) {
            ++bank.interlock_rejections;
            if (!out.event) out.event = InterlockEvent{now, id};
            return;
        }
        self.commanded = GateCommand::Closed;
        self.actual = Conduction::Closed;
    };
    if (s1_cmd == GateCommand::Closed) try_close(bank.s1, bank.s2, SwitchId::S1);
    if (s2_cmd == GateCommand::Closed) try_close(bank.s2, bank.s1, SwitchId::S2);

    out.bank = bank;
    return out;
}

double conduction_fraction(const SwitchState& sw, double t0, double dt) noexcept {
    switch (sw.actual) {
        case Conduction::Closed:
            return 1.0;
        case Conduction::Open:
            return 0.0;
        case Conduction::TurningOff:
            if (dt <= 0.0) return 0.0;
            return std::clamp((sw.turnoff_deadline - t0) / dt, 0.0, 1.0);
    }
    return 0.0;
}

SwitchBank check_blocking(SwitchBank bank, double v_across_s1, double v_across_s2) {
    bank.s1 = observe_blocking(bank.s1, v_across_s1, "S1");
    bank.s2 = observe_blocking(bank.s2, v_across_s2, "S2");
    return bank;
}

}  // namespace dmc
