#include "dmc/errors.hpp"
#include "dmc/io.hpp"
#include "dmc/plant.hpp"
#include "dmc/scenario.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace dmc;

namespace {

py::dict summary_dict(const SummaryRow& r) {
    py::dict d;
    d["test_setting"] = r.test_setting;
    d["empty"] = r.empty;
    d["completed"] = r.completed;
    d["max_metric"] = r.max_metric;
    d["min_metric"] = r.min_metric;
    d["avg_metric"] = r.avg_metric;
    d["band"] = r.band;
    d["current_upper"] = r.current_upper;
    d["current_lower"] = r.current_lower;
    d["charging_time"] = r.charging_time;
    return d;
}

py::dict telemetry_columns(const std::vector<TelemetryRecord>& tel) {
    const auto n = static_cast<py::ssize_t>(tel.size());
    py::array_t<double> time(n), v_bus(n), q(n), i(n), v_cap(n), energy(n), duty(n), ref(n);
    py::list phase;
    for (py::ssize_t k = 0; k < n; ++k) {
        const TelemetryRecord& r = tel[static_cast<std::size_t>(k)];
        time.mutable_at(k) = r.sample.time;
        v_bus.mutable_at(k) = r.sample.v_bus;
        q.mutable_at(k) = r.sample.q_mtg;
        i.mutable_at(k) = r.sample.i_charge;
        v_cap.mutable_at(k) = r.sample.v_cap;
        energy.mutable_at(k) = r.sample.stored_energy;
        duty.mutable_at(k) = r.duty;
        ref.mutable_at(k) = r.reference;
        phase.append(std::string(to_string(r.phase)));
    }
    py::dict d;
    d["time_s"] = time;
    d["v_bus_V"] = v_bus;
    d["q_mtg_var"] = q;
    d["i_charge_A"] = i;
    d["v_cap_V"] = v_cap;
    d["energy_J"] = energy;
    d["phase"] = phase;
    d["duty"] = duty;
    d["reference_A"] = ref;
    return d;
}

ScenarioConfig config_from(const py::object& cfg) {
    if (cfg.is_none()) return ScenarioConfig{};
    return parse_config(cfg.cast<std::string>(), {}, "<python>");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Supercapacitor charging under disturbance metric control";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<InfeasibleLimitsError>(m, "InfeasibleLimitsError", base.ptr());
    py::register_exception<CalibrationError>(m, "CalibrationError", base.ptr());
    py::register_exception<NonConvergenceError>(m, "NonConvergenceError", base.ptr());
    py::register_exception<StalledRunError>(m, "StalledRunError", base.ptr());
    py::register_exception<OverstressError>(m, "OverstressError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());

    m.def("steady_terminal_current", &steady_terminal_current, py::arg("emf"), py::arg("x_g"), py::arg("r_line"),
          py::arg("r_load"));
    m.def("steady_bus_voltage", &steady_bus_voltage, py::arg("emf"), py::arg("x_g"), py::arg("i_load"));
    m.def("transient_charging_current", &transient_charging_current, py::arg("emf"), py::arg("x_eff"),
          py::arg("r_line"));
    m.def("required_capacitance", &required_capacitance, py::arg("energy"), py::arg("v_final"));

    m.def(
        "resolve_config", [](const py::object& text) { return dump_config(config_from(text)); },
        py::arg("text") = py::none(), "Full resolved config text for the given config text (or the defaults).");
    m.def(
        "load_config", [](const std::filesystem::path& path) { return dump_config(load_config(path)); },
        py::arg("path"), "Reads, checks and resolves a config file.");
    m.def("canonical_configs", [] {
        std::vector<std::string> out;
        for (const ScenarioConfig& c : canonical_scenarios()) out.push_back(dump_config(c));
        return out;
    });

    m.def(
        "run",
        [](const py::object& text) {
            const ScenarioConfig cfg = config_from(text);
            RunResult result;
            {
                py::gil_scoped_release release;
                result = run(cfg);
            }
            py::dict d;
            d["summary"] = summary_dict(result.summary);
            d["telemetry"] = telemetry_columns(result.telemetry);
            d["done_time"] = result.done_time ? py::cast(*result.done_time) : py::none();
            d["max_m1_after_suspension"] = result.max_m1_after_suspension;
            d["max_m2_after_grace"] = result.max_m2_after_grace;
            d["attenuation_count"] = result.final_controller.attenuation_count;
            d["peak_blocking_voltage"] = result.final_plant.switches.s1.peak_blocking_voltage;
            return d;
        },
        py::arg("config") = py::none(), "Runs one scenario given its config text.");

    m.def(
        "summarize",
        [](const std::filesystem::path& csv, const py::object& text) {
            return summary_dict(summarize(read_telemetry(csv), config_from(text)));
        },
        py::arg("telemetry_csv"), py::arg("config") = py::none(),
        "Recomputes the summary row from a telemetry CSV.");

    m.attr("TELEMETRY_HEADER") = std::string(kTelemetryHeader);
}
