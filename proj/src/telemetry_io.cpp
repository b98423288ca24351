#include "dmc/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dmc {

namespace {

double field_double(std::string_view text, std::size_t line, int column) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::runtime_error("telemetry line " + std::to_string(line) + ", column " +
                                 std::to_string(column) + ": bad number '" + std::string(text) + "'");
    }
    return value;
}

std::string fixed(double value, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, value);
    return buf;
}

}  // namespace

void write_telemetry(std::ostream& out, const std::vector<TelemetryRecord>& telemetry) {
    out << kTelemetryHeader << '\n';
    std::string row;
    for (const TelemetryRecord& r : telemetry) {
        row.clear();
        const MetricSample& s = r.sample;
        for (double v : {s.time, s.v_bus, s.q_mtg, s.i_charge, s.v_cap, s.stored_energy}) {
            row += format_double(v);
            row += ',';
        }
        row += to_string(r.phase);
        row += ',';
        row += format_double(r.duty);
        row += ',';
        row += format_double(r.reference);
        row += '\n';
        out << row;
    }
}

void write_telemetry(const std::filesystem::path& path, const std::vector<TelemetryRecord>& telemetry) {
    std::filesystem::path tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (out) write_telemetry(out, telemetry);
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("failed writing telemetry to " + path.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("failed to move telemetry into " + path.string());
    }
}

std::vector<TelemetryRecord> read_telemetry(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kTelemetryHeader) {
        throw std::runtime_error("telemetry: missing or unexpected header");
    }
    std::vector<TelemetryRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string_view> cols;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            cols.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (cols.size() != 9) {
            throw std::runtime_error("telemetry line " + std::to_string(line_no) + ": expected 9 columns");
        }
        TelemetryRecord r;
        r.sample.time = field_double(cols[0], line_no, 1);
        r.sample.v_bus = field_double(cols[1], line_no, 2);
        r.sample.q_mtg = field_double(cols[2], line_no, 3);
        r.sample.i_charge = field_double(cols[3], line_no, 4);
        r.sample.v_cap = field_double(cols[4], line_no, 5);
        r.sample.stored_energy = field_double(cols[5], line_no, 6);
        try {
            r.phase = phase_from_string(cols[6]);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("telemetry line " + std::to_string(line_no) + ": " + e.what());
        }
        r.duty = field_double(cols[7], line_no, 8);
        r.reference = field_double(cols[8], line_no, 9);
        out.push_back(r);
    }
    return out;
}

std::vector<TelemetryRecord> read_telemetry(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read telemetry file " + path.string());
    return read_telemetry(in);
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << kSummaryHeader << '\n';
    for (const SummaryRow& r : rows) {
        out << r.test_setting << ',';
        if (r.empty) {
            out << ",,," << (r.band ? "var" : "V") << ",,,,0\n";
            continue;
        }
        out << format_double(r.max_metric) << ',' << format_double(r.min_metric) << ','
            << format_double(r.avg_metric) << ',' << (r.band ? "var" : "V") << ','
            << (r.band ? format_double(r.current_lower) : std::string()) << ','
            << format_double(r.current_upper) << ',' << format_double(r.charging_time) << ','
            << (r.completed ? 1 : 0) << '\n';
    }
}

void write_summary_table(std::ostream& out, const std::vector<SummaryRow>& rows) {
    const std::vector<std::string> head{"test setting",        "maximum metric value", "minimum metric value",
                                        "average metric value", "charging current value", "charging time"};
    std::vector<std::vector<std::string>> cells;
    for (const SummaryRow& r : rows) {
        if (r.empty) {
            cells.push_back({r.test_setting, "-", "-", "-", "-", "-"});
            continue;
        }
        const double scale = r.band ? 1e6 : 1e3;
        const std::string unit = r.band ? " Mvar" : " kV";
        const int prec = r.band ? 2 : 3;
        std::string current = r.band ? "(" + fixed(r.current_lower / 1e3, 2) + ", " + fixed(r.current_upper / 1e3, 2) + ") kA"
                                     : fixed(r.current_upper / 1e3, 2) + " kA";
        std::string time = fixed(r.charging_time, 1) + " s";
        if (!r.completed) time += " (incomplete)";
        cells.push_back({r.test_setting, fixed(r.max_metric / scale, prec) + unit,
                         fixed(r.min_metric / scale, prec) + unit, fixed(r.avg_metric / scale, prec) + unit,
                         current, time});
    }
    std::vector<std::size_t> width(head.size());
    for (std::size_t c = 0; c < head.size(); ++c) {
        width[c] = head[c].size();
        for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
    }
    auto emit = [&](const std::vector<std::string>& row) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << row[c];
            if (c + 1 < row.size()) out << std::string(width[c] - row[c].size() + 2, ' ');
        }
        out << '\n';
    };
    emit(head);
    std::size_t total = 0;
    for (std::size_t w : width) total += w + 2;
    out << std::string(total - 2, '-') << '\n';
    for (const auto& row : cells) emit(row);
}

}  // namespace dmc
