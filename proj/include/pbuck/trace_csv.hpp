#pragma once

#include "pbuck/errors.hpp"
#include "pbuck/sim.hpp"
#include "pbuck/text.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace pbuck {

inline constexpr std::array<std::string_view, 14> kTraceColumns = {
    "t", "iL1", "iL2", "Vo", "d1", "d2", "d2_dot", "e", "e2", "V1_lyap", "V2_lyap", "R", "sat1", "sat2"};

inline std::string trace_csv_header() {
    std::string h;
    for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
        if (i) h += ',';
        h += kTraceColumns[i];
    }
    return h;
}

/// Comma-separated, '.' decimal point, shortest round-trip number form.
inline void write_trace_csv(std::ostream& os, const Trace& trace) {
    os << trace_csv_header() << '\n';
    std::string row;
    for (const auto& r : trace) {
        row.clear();
        for (double v : {r.t, r.iL1, r.iL2, r.Vo, r.d1, r.d2, r.d2_dot, r.e, r.e2, r.V1_lyap, r.V2_lyap, r.R_active}) {
            row += text::format_number(v);
            row += ',';
        }
        row += r.sat1 ? '1' : '0';
        row += ',';
        row += r.sat2 ? '1' : '0';
        row += '\n';
        os << row;
    }
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto c = line.find(',', pos);
        out.emplace_back(text::trim(line.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos)));
        if (c == std::string_view::npos) break;
        pos = c + 1;
    }
    return out;
}

/// Reads a trace written by write_trace_csv. Column order may differ but
/// every standard column must be present.
inline Trace read_trace_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw FormatError("empty CSV: missing header");
    const auto header = split_csv_line(line);
    std::array<std::size_t, kTraceColumns.size()> idx{};
    for (std::size_t c = 0; c < kTraceColumns.size(); ++c) {
        auto it = std::find(header.begin(), header.end(), kTraceColumns[c]);
        if (it == header.end()) throw FormatError("CSV header is missing column '" + std::string(kTraceColumns[c]) + "'");
        idx[c] = static_cast<std::size_t>(it - header.begin());
    }
    Trace trace;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw FormatError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                              " fields");
        }
        std::array<double, kTraceColumns.size()> v{};
        for (std::size_t c = 0; c < v.size(); ++c) {
            auto x = text::parse_number(cells[idx[c]]);
            if (!x) throw FormatError("CSV line " + std::to_string(line_no) + ": bad number in column '" +
                                      std::string(kTraceColumns[c]) + "'");
            v[c] = *x;
        }
        TraceRecord r;
        r.t = v[0];
        r.iL1 = v[1];
        r.iL2 = v[2];
        r.Vo = v[3];
        r.d1 = v[4];
        r.d2 = v[5];
        r.d2_dot = v[6];
        r.e = v[7];
        r.e2 = v[8];
        r.per_unit_diff = v[8];
        r.V1_lyap = v[9];
        r.V2_lyap = v[10];
        r.R_active = v[11];
        r.sat1 = v[12] != 0.0;
        r.sat2 = v[13] != 0.0;
        trace.push_back(r);
    }
    return trace;
}

}  // namespace pbuck
