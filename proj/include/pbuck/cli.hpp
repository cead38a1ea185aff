#pragma once

// Command implementations behind the `pbuck` executable. Argument parsing
// lives in tools/pbuck_cli.cpp; everything here takes plain values and
// streams so it can be driven from tests.

#include "pbuck/errors.hpp"
#include "pbuck/metrics.hpp"
#include "pbuck/plot_script.hpp"
#include "pbuck/scenario_file.hpp"
#include "pbuck/sim.hpp"
#include "pbuck/text.hpp"
#include "pbuck/trace_csv.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

namespace pbuck::cli {

enum ExitCode : int {
    kOk = 0,
    kIoError = 2,
    kParseError = 3,
    kDivergence = 4,
    kCcmViolation = 5,
    kFormatError = 6,
    kUsage = 64,
};

struct RunFlags {
    std::optional<std::filesystem::path> out_csv;
    std::optional<double> dt;
    std::optional<double> t_end;
    std::optional<int> record_every;
    bool no_ccm_check = false;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string format_metrics(const RunMetrics& m, std::size_t records) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    auto line = [&](const char* key, const std::string& value) {
        os << std::left << std::setw(26) << key << ": " << value << '\n';
    };
    auto num = [](double v, const char* unit) { return text::format_number(v) + unit; };
    auto opt = [&](const std::optional<double>& v, const char* unit) {
        return v ? num(*v, unit) : std::string("not settled");
    };
    line("records", std::to_string(records));
    line("settle_time_v", opt(m.settle_time_v, " s"));
    line("settle_time_share", opt(m.settle_time_share, " s"));
    line("ss_voltage_error", num(m.ss_voltage_error, " V"));
    line("ss_sharing_error", num(m.ss_sharing_error, ""));
    line("recovery_time", m.recovery_time ? num(*m.recovery_time, " s") : std::string("n/a"));
    line("lyap_violation_fraction", num(m.lyap_violation_fraction, ""));
    line("lyap_samples", std::to_string(m.lyap_samples));
    line("max_duty_saturation_time", num(m.max_duty_saturation_time, " s"));
    return os.str();
}

/// Maps an exception from parsing or simulation to an exit code and prints a
/// one-line message.
inline int report(std::ostream& err, const std::exception& ex) {
    auto code = kParseError;
    if (dynamic_cast<const IoError*>(&ex)) code = kIoError;
    else if (dynamic_cast<const DivergenceError*>(&ex)) code = kDivergence;
    else if (dynamic_cast<const CcmViolation*>(&ex)) code = kCcmViolation;
    else if (dynamic_cast<const FormatError*>(&ex)) code = kFormatError;
    const char* label = code == kIoError        ? "I/O error"
                        : code == kDivergence   ? "divergence"
                        : code == kCcmViolation ? "CCM violation"
                        : code == kFormatError  ? "format error"
                                                : "scenario error";
    err << "pbuck: " << label << ": " << ex.what() << '\n';
    return code;
}

inline int run_command(const std::filesystem::path& scenario_path, const RunFlags& flags, std::ostream& out,
                       std::ostream& err) {
    try {
        auto file = parse_scenario_file(read_file(scenario_path));
        if (flags.dt) file.dt_s = *flags.dt;
        if (flags.t_end) file.t_end_s = *flags.t_end;
        if (flags.record_every) file.record_every = *flags.record_every;
        const auto scenario = file.to_scenario();
        try {
            validate(scenario);
        } catch (const Error& ex) {
            throw ParseError(ParseError::Kind::invalid_value, 0, "", ex.what());
        }
        if (file.record_every < 1) {
            throw ParseError(ParseError::Kind::invalid_value, 0, "record_every", "must be a positive integer");
        }

        RunOptions opts;
        opts.record_every = file.record_every;
        opts.enforce_ccm = !flags.no_ccm_check;
        const auto trace = run(scenario, opts);

        const auto csv_path = flags.out_csv.value_or(std::filesystem::path(scenario_path.stem().string() + ".csv"));
        {
            std::ofstream csv(csv_path, std::ios::binary);
            if (!csv) throw IoError("cannot write '" + csv_path.string() + "'");
            write_trace_csv(csv, trace);
            if (!csv) throw IoError("failed writing '" + csv_path.string() + "'");
        }
        out << format_metrics(compute_metrics(trace, scenario.Vref), trace.size());
        out << std::left << std::setw(26) << "csv" << ": " << csv_path.string() << '\n';
        return kOk;
    } catch (const std::exception& ex) {
        return report(err, ex);
    }
}

inline int plot_command(const std::filesystem::path& csv_path, const std::optional<std::filesystem::path>& out_path,
                        std::ostream& out, std::ostream& err) {
    try {
        const auto script = emit_plot_script(csv_path);
        if (out_path) {
            std::ofstream f(*out_path, std::ios::binary);
            if (!f) throw IoError("cannot write '" + out_path->string() + "'");
            f << script;
        } else {
            out << script;
        }
        return kOk;
    } catch (const std::exception& ex) {
        return report(err, ex);
    }
}

/// Parses the scenario and prints its canonical form.
inline int validate_command(const std::filesystem::path& scenario_path, std::ostream& out, std::ostream& err) {
    try {
        const auto file = parse_scenario_file(read_file(scenario_path));
        out << to_text(file);
        return kOk;
    } catch (const std::exception& ex) {
        return report(err, ex);
    }
}

}  // namespace pbuck::cli
