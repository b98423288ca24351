#include "dmc/errors.hpp"
#include "dmc/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace dmc {

namespace {

struct Field {
    std::string_view section;
    std::string_view key;
    std::function<std::string(const ScenarioConfig&)> get;
    std::function<void(ScenarioConfig&, std::string_view)> set;
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view text) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument("expected a number, got '" + std::string(text) + "'");
    }
    return value;
}

int parse_int(std::string_view text) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument("expected an integer, got '" + std::string(text) + "'");
    }
    return value;
}

template <class Access>
Field number(std::string_view section, std::string_view key, Access access) {
    return Field{section, key,
                 [access](const ScenarioConfig& c) {
                     return format_double(access(c));
                 },
                 [access](ScenarioConfig& c, std::string_view v) { access(c) = parse_double(v); }};
}

template <class Access>
Field integer(std::string_view section, std::string_view key, Access access) {
    return Field{section, key,
                 [access](const ScenarioConfig& c) {
                     return std::to_string(access(c));
                 },
                 [access](ScenarioConfig& c, std::string_view v) { access(c) = parse_int(v); }};
}

template <class Enum, class Access>
Field choice(std::string_view section, std::string_view key,
             std::vector<std::pair<Enum, std::string_view>> names, Access access) {
    return Field{section, key,
                 [access, names](const ScenarioConfig& c) {
                     const Enum value = access(c);
                     for (const auto& [e, n] : names) {
                         if (e == value) return std::string(n);
                     }
                     return std::string("?");
                 },
                 [access, names](ScenarioConfig& c, std::string_view v) {
                     for (const auto& [e, n] : names) {
                         if (n == v) {
                             access(c) = e;
                             return;
                         }
                     }
                     std::string allowed;
                     for (const auto& [e, n] : names) allowed += (allowed.empty() ? "" : "|") + std::string(n);
                     throw std::invalid_argument("expected one of " + allowed + ", got '" + std::string(v) + "'");
                 }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        using C = ScenarioConfig;
        std::vector<Field> f;
        f.push_back(Field{"scenario", "name", [](const C& c) { return c.name; },
                          [](C& c, std::string_view v) { c.name = std::string(v); }});
        f.push_back(choice<BusMode>("scenario", "mode", {{BusMode::Ring, "ring"}, {BusMode::SplitPlant, "split"}},
                                    [](auto& c) -> auto& { return c.mode; }));
        f.push_back(choice<ControlMode>("scenario", "control_mode", {{ControlMode::M1, "m1"}, {ControlMode::M2, "m2"}},
                                        [](auto& c) -> auto& { return c.controller.mode; }));
        f.push_back(number("scenario", "initial_p_W", [](auto& c) -> auto& { return c.initial_p; }));
        f.push_back(number("scenario", "initial_q_var", [](auto& c) -> auto& { return c.initial_q; }));
        f.push_back(number("scenario", "charge_start_s", [](auto& c) -> auto& { return c.charge_start; }));
        f.push_back(number("scenario", "duration_s", [](auto& c) -> auto& { return c.sim_duration; }));
        f.push_back(number("scenario", "dt_s", [](auto& c) -> auto& { return c.dt; }));
        f.push_back(integer("scenario", "decimation", [](auto& c) -> auto& { return c.decimation; }));
        f.push_back(number("scenario", "watchdog_window_s", [](auto& c) -> auto& { return c.watchdog_window; }));
        f.push_back(number("scenario", "grace_window_s", [](auto& c) -> auto& { return c.grace_window; }));

        auto lim = [](auto& c) -> auto& { return c.controller.limits; };
        f.push_back(number("limits", "v_bus_limit_V", [lim](auto& c) -> auto& { return lim(c).v_bus_limit; }));
        f.push_back(number("limits", "m1_limit_V", [lim](auto& c) -> auto& { return lim(c).m1_limit; }));
        f.push_back(number("limits", "m1_alert_V", [lim](auto& c) -> auto& { return lim(c).m1_alert; }));
        f.push_back(number("limits", "q_limit_var", [lim](auto& c) -> auto& { return lim(c).q_limit; }));
        f.push_back(number("limits", "q_alert_var", [lim](auto& c) -> auto& { return lim(c).q_alert; }));
        f.push_back(number("limits", "attenuation", [lim](auto& c) -> auto& { return lim(c).attenuation; }));
        f.push_back(number("limits", "band_coefficient", [lim](auto& c) -> auto& { return lim(c).band_coefficient; }));
        f.push_back(number("limits", "target_cap_voltage_V",
                           [lim](auto& c) -> auto& { return lim(c).target_cap_voltage; }));
        f.push_back(number("limits", "control_period_s", [lim](auto& c) -> auto& { return lim(c).control_period; }));

        f.push_back(number("controller", "probe_slew_A_per_s", [](auto& c) -> auto& { return c.controller.probe_slew; }));
        f.push_back(number("controller", "kp_per_A", [](auto& c) -> auto& { return c.controller.gains.kp; }));
        f.push_back(number("controller", "ki_per_A_s", [](auto& c) -> auto& { return c.controller.gains.ki; }));
        f.push_back(number("controller", "m2_monitor_window_s",
                           [](auto& c) -> auto& { return c.controller.m2_monitor_window; }));
        f.push_back(integer("controller", "attenuation_cap", [](auto& c) -> auto& { return c.controller.attenuation_cap; }));
        f.push_back(number("controller", "capture_tolerance",
                           [](auto& c) -> auto& { return c.controller.capture_tolerance; }));

        auto pl = [](auto& c) -> auto& { return c.plant; };
        f.push_back(number("plant", "bus_voltage_V", [pl](auto& c) -> auto& { return pl(c).bus_voltage; }));
        f.push_back(number("plant", "x_sync_ohm", [pl](auto& c) -> auto& { return pl(c).x_sync; }));
        f.push_back(number("plant", "x_transient_ohm", [pl](auto& c) -> auto& { return pl(c).x_transient; }));
        f.push_back(number("plant", "t_reactance_relax_s", [pl](auto& c) -> auto& { return pl(c).t_reactance_relax; }));
        f.push_back(number("plant", "t_exciter_s", [pl](auto& c) -> auto& { return pl(c).t_exciter; }));
        f.push_back(number("plant", "avr_gain", [pl](auto& c) -> auto& { return pl(c).avr_gain; }));
        f.push_back(number("plant", "emf_ceiling_ratio", [pl](auto& c) -> auto& { return pl(c).emf_ceiling_ratio; }));
        f.push_back(number("plant", "r_line_ohm", [pl](auto& c) -> auto& { return pl(c).r_line; }));
        f.push_back(number("plant", "r_commutation_ohm", [pl](auto& c) -> auto& { return pl(c).r_commutation; }));
        f.push_back(number("plant", "rectifier_gain", [pl](auto& c) -> auto& { return pl(c).rectifier_gain; }));
        f.push_back(number("plant", "disturbance_threshold",
                           [pl](auto& c) -> auto& { return pl(c).disturbance_threshold; }));
        f.push_back(choice<Integrator>("plant", "integrator",
                                       {{Integrator::ForwardEuler, "euler"}, {Integrator::Heun, "heun"}},
                                       [pl](auto& c) -> auto& { return pl(c).integrator; }));

        f.push_back(number("charger", "l_filter_H", [pl](auto& c) -> auto& { return pl(c).l_filter; }));
        f.push_back(number("charger", "r_parasitic_ohm", [pl](auto& c) -> auto& { return pl(c).r_parasitic; }));
        f.push_back(number("charger", "capacitance_F", [pl](auto& c) -> auto& { return pl(c).capacitance; }));
        f.push_back(number("charger", "initial_cap_voltage_V",
                           [pl](auto& c) -> auto& { return pl(c).initial_cap_voltage; }));

        f.push_back(number("switchgear", "turnoff_delay_s", [pl](auto& c) -> auto& { return pl(c).turnoff_delay; }));
        f.push_back(number("switchgear", "blocking_voltage_limit_V",
                           [pl](auto& c) -> auto& { return pl(c).blocking_voltage_limit; }));
        return f;
    }();
    return table;
}

}  // namespace

std::string format_double(double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

ScenarioConfig parse_config(std::string_view text, const ScenarioConfig& base, std::string_view source) {
    ScenarioConfig config = base;
    std::string section;
    std::set<std::string> seen;
    std::size_t line_no = 0;

    auto fail = [&](const std::string& msg) {
        throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": " + msg);
    };

    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail("unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            const bool known = std::any_of(fields().begin(), fields().end(),
                                           [&](const Field& f) { return f.section == section; });
            if (!known) fail("unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail("expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (section.empty()) fail("key '" + key + "' outside of any section");

        const auto it = std::find_if(fields().begin(), fields().end(),
                                     [&](const Field& f) { return f.section == section && f.key == key; });
        if (it == fields().end()) fail("unknown key '" + key + "' in [" + section + "]");
        if (!seen.insert(section + "." + key).second) fail("duplicate key '" + key + "'");
        try {
            it->set(config, value);
        } catch (const std::invalid_argument& e) {
            fail("key '" + key + "': " + e.what());
        }
    }
    return config;
}

ScenarioConfig load_config(const std::filesystem::path& path, const ScenarioConfig& base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), base, path.string());
}

std::string dump_config(const ScenarioConfig& config) {
    std::string out;
    std::string_view section;
    for (const Field& f : fields()) {
        if (f.section != section) {
            if (!section.empty()) out += '\n';
            section = f.section;
            out += "[" + std::string(section) + "]\n";
        }
        out += std::string(f.key) + " = " + f.get(config) + "\n";
    }
    return out;
}

}  // namespace dmc
