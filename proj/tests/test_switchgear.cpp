#include "dmc/errors.hpp"
#include "dmc/switchgear.hpp"

#include <doctest.h>

#include <random>

using namespace dmc;

TEST_CASE("opening S1 completes after the turn-off delay") {
    SwitchBank bank = make_switch_bank();
    bank = apply_gate(bank, GateCommand::Closed, GateCommand::Open, 0.0).bank;
    REQUIRE(bank.s1.actual == Conduction::Closed);

    bank = apply_gate(bank, GateCommand::Open, GateCommand::Open, 0.0).bank;
    CHECK(bank.s1.actual == Conduction::TurningOff);
    CHECK(bank.s1.turnoff_deadline == doctest::Approx(7.3e-6));

    CHECK(advance(bank, 7.2e-6).s1.actual == Conduction::TurningOff);
    CHECK(advance(bank, 7.3e-6).s1.actual == Conduction::Open);
}

TEST_CASE("repeated open command is a no-op") {
    const SwitchBank bank = make_switch_bank();
    const GateOutcome out = apply_gate(bank, GateCommand::Open, GateCommand::Open, 1.0);
    CHECK(out.bank.s1.actual == Conduction::Open);
    CHECK(out.bank.s1.commanded == GateCommand::Open);
    CHECK_FALSE(out.event.has_value());
    CHECK(out.bank.interlock_rejections == 0);
}

TEST_CASE("interlock refuses S2 while S1 conducts") {
    SwitchBank bank = apply_gate(make_switch_bank(), GateCommand::Closed, GateCommand::Open, 0.0).bank;
    const GateOutcome out = apply_gate(bank, GateCommand::Closed, GateCommand::Closed, 1e-3);
    REQUIRE(out.event.has_value());
    CHECK(out.event->rejected == SwitchId::S2);
    CHECK(out.bank.s2.actual == Conduction::Open);
    CHECK(out.bank.s1.actual == Conduction::Closed);
    CHECK(out.bank.interlock_rejections == 1);
}

TEST_CASE("interlock also holds while the other switch is turning off") {
    SwitchBank bank = apply_gate(make_switch_bank(), GateCommand::Closed, GateCommand::Open, 0.0).bank;
    bank = apply_gate(bank, GateCommand::Open, GateCommand::Closed, 1.0).bank;
    CHECK(bank.s1.actual == Conduction::TurningOff);
    CHECK(bank.s2.actual == Conduction::Open);
    bank = apply_gate(bank, GateCommand::Open, GateCommand::Closed, 1.0 + 1e-5).bank;
    CHECK(bank.s1.actual == Conduction::Open);
    CHECK(bank.s2.actual == Conduction::Closed);
}

TEST_CASE("conduction fraction covers the turn-off remainder of a step") {
    SwitchBank bank = apply_gate(make_switch_bank(), GateCommand::Closed, GateCommand::Open, 0.0).bank;
    CHECK(conduction_fraction(bank.s1, 0.0, 50e-6) == 1.0);
    bank = apply_gate(bank, GateCommand::Open, GateCommand::Open, 0.0).bank;
    CHECK(conduction_fraction(bank.s1, 0.0, 50e-6) == doctest::Approx(7.3e-6 / 50e-6));
    CHECK(conduction_fraction(make_switch_bank().s1, 0.0, 50e-6) == 0.0);
}

TEST_CASE("blocking voltage is recorded and overstress is fatal") {
    SwitchBank bank = check_blocking(make_switch_bank(), 5e3, 0.0);
    CHECK(bank.s1.peak_blocking_voltage == 5e3);
    CHECK_THROWS_AS(check_blocking(bank, 6.6e3, 0.0), OverstressError);
    CHECK_THROWS_AS(check_blocking(bank, 0.0, 6.6e3), OverstressError);
}

TEST_CASE("randomized command fuzzing never reaches simultaneous conduction") {
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_real_distribution<double> gap(0.0, 2e-5);
    SwitchBank bank = make_switch_bank();
    double t = 0.0;
    int violations = 0;
    for (int i = 0; i < 100000; ++i) {
        t += gap(rng);
        const auto c1 = coin(rng) ? GateCommand::Closed : GateCommand::Open;
        const auto c2 = coin(rng) ? GateCommand::Closed : GateCommand::Open;
        bank = apply_gate(advance(bank, t), c1, c2, t).bank;
        if (bank.s1.conducting() && bank.s2.conducting()) ++violations;
    }
    CHECK(violations == 0);
    CHECK(bank.interlock_rejections > 0);
}
