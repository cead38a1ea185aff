#pragma once

// Plain-text scenario files.
//
//   [converter1]            # also [converter2]
//   L_mH = 1
//   C_uF = 10
//   Vin_V = 16              # optional, default 16
//   Imax_A = 5
//   [control]
//   k1 = 1
//   k2 = 1
//   duty_min = 0            # optional
//   duty_max = 1            # optional
//   x_guard = 0.001         # optional
//   [load]
//   0 = 10                  # t_s = R_ohm, first entry at t = 0
//   0.05 = 15
//   [sim]
//   Vref_V = 8
//   dt_s = 1e-6             # optional
//   t_end_s = 0.1           # optional
//   record_every = 50       # optional
//   init = zero             # optional: zero | equilibrium
//   d2_init = 0             # optional, init = zero only
//
// Values stay in file units inside ScenarioFile; conversion to SI happens in
// to_scenario(). Comments start with '#' or ';'.

#include "pbuck/control.hpp"
#include "pbuck/errors.hpp"
#include "pbuck/model.hpp"
#include "pbuck/sim.hpp"
#include "pbuck/text.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace pbuck {

enum class InitMode { zero, equilibrium };

struct ConverterSection {
    double L_mH = 1.0;
    double C_uF = 10.0;
    double Vin_V = 16.0;
    double Imax_A = 1.0;

    bool operator==(const ConverterSection&) const = default;
};

struct ScenarioFile {
    ConverterSection converter1;
    ConverterSection converter2;
    ControlGains control;
    LoadSchedule load;
    double Vref_V = 8.0;
    double dt_s = 1e-6;
    double t_end_s = 0.1;
    int record_every = 50;
    InitMode init = InitMode::zero;
    double d2_init = 0.0;

    bool operator==(const ScenarioFile&) const = default;

    Scenario to_scenario() const {
        Scenario sc;
        auto si = [](const ConverterSection& c) {
            return ConverterParams{c.L_mH / 1e3, c.C_uF / 1e6, c.Vin_V, c.Imax_A};
        };
        sc.p1 = si(converter1);
        sc.p2 = si(converter2);
        sc.gains = control;
        sc.Vref = Vref_V;
        sc.load = load;
        sc.dt = dt_s;
        sc.t_end = t_end_s;
        if (init == InitMode::equilibrium) {
            sc.initial_state = equilibrium(sc.p1, sc.p2, load.front().R, Vref_V);
        } else {
            sc.initial_state = PlantState{0.0, 0.0, 0.0, d2_init};
        }
        return sc;
    }
};

namespace detail {

using Kind = ParseError::Kind;

struct KeyInfo {
    const char* name;
    bool required;
};

inline const std::map<std::string, std::vector<KeyInfo>, std::less<>>& section_keys() {
    static const std::map<std::string, std::vector<KeyInfo>, std::less<>> keys = {
        {"converter1", {{"L_mH", true}, {"C_uF", true}, {"Vin_V", false}, {"Imax_A", true}}},
        {"converter2", {{"L_mH", true}, {"C_uF", true}, {"Vin_V", false}, {"Imax_A", true}}},
        {"control", {{"k1", true}, {"k2", true}, {"duty_min", false}, {"duty_max", false}, {"x_guard", false}}},
        {"load", {}},
        {"sim",
         {{"Vref_V", true},
          {"dt_s", false},
          {"t_end_s", false},
          {"record_every", false},
          {"init", false},
          {"d2_init", false}}},
    };
    return keys;
}

struct Entry {
    std::string value;
    int line;
};

}  // namespace detail

/// Parse and validate a scenario document, keeping file units.
inline ScenarioFile parse_scenario_file(std::string_view text) {
    using detail::Kind;
    const auto& known = detail::section_keys();

    // section -> key -> (raw value, line)
    std::map<std::string, std::map<std::string, detail::Entry>> raw;
    std::vector<std::pair<detail::Entry, detail::Entry>> load_lines;
    std::set<std::string> seen_sections;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
        line = text::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(Kind::syntax, line_no, "", "unterminated section header");
            section = std::string(text::trim(line.substr(1, line.size() - 2)));
            if (!known.contains(section)) throw ParseError(Kind::unknown_key, line_no, section, "unknown section");
            if (!seen_sections.insert(section).second) {
                throw ParseError(Kind::syntax, line_no, section, "duplicate section");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(Kind::syntax, line_no, "", "expected 'key = value'");
        const std::string key(text::trim(line.substr(0, eq)));
        const std::string value(text::trim(line.substr(eq + 1)));
        if (section.empty()) throw ParseError(Kind::syntax, line_no, key, "key outside of any section");
        if (key.empty()) throw ParseError(Kind::syntax, line_no, "", "empty key");

        if (section == "load") {
            load_lines.push_back({{key, line_no}, {value, line_no}});
            continue;
        }
        const auto& allowed = known.find(section)->second;
        if (std::none_of(allowed.begin(), allowed.end(), [&](const auto& k) { return key == k.name; })) {
            throw ParseError(Kind::unknown_key, line_no, key, "unknown key in [" + section + "]");
        }
        if (!raw[section].emplace(key, detail::Entry{value, line_no}).second) {
            throw ParseError(Kind::syntax, line_no, key, "duplicate key");
        }
    }

    for (const auto& [name, keys] : known) {
        for (const auto& k : keys) {
            if (k.required && !(raw.contains(name) && raw[name].contains(k.name))) {
                throw ParseError(Kind::missing_key, 0, k.name, "missing required key in [" + name + "]");
            }
        }
    }
    if (load_lines.empty()) throw ParseError(Kind::missing_key, 0, "load", "at least one load entry is required");

    auto number = [](const detail::Entry& e, const std::string& key) {
        auto v = text::parse_number(e.value);
        if (!v || !std::isfinite(*v)) throw ParseError(Kind::non_numeric, e.line, key, "not a number: '" + e.value + "'");
        return *v;
    };
    auto line_of = [&](const std::string& sec, const std::string& key) {
        auto s = raw.find(sec);
        if (s == raw.end()) return 0;
        auto k = s->second.find(key);
        return k == s->second.end() ? 0 : k->second.line;
    };
    auto get = [&](const std::string& sec, const std::string& key, double fallback) {
        auto s = raw.find(sec);
        if (s == raw.end()) return fallback;
        auto k = s->second.find(key);
        return k == s->second.end() ? fallback : number(k->second, key);
    };
    auto invalid = [&](const std::string& sec, const std::string& key, const std::string& msg) {
        return ParseError(Kind::invalid_value, line_of(sec, key), key, msg);
    };

    ScenarioFile f;
    for (auto [sec, conv] : {std::pair{"converter1", &f.converter1}, std::pair{"converter2", &f.converter2}}) {
        conv->L_mH = get(sec, "L_mH", 0.0);
        conv->C_uF = get(sec, "C_uF", 0.0);
        conv->Vin_V = get(sec, "Vin_V", 16.0);
        conv->Imax_A = get(sec, "Imax_A", 0.0);
        for (auto [key, v] : {std::pair{"L_mH", conv->L_mH}, std::pair{"C_uF", conv->C_uF},
                              std::pair{"Vin_V", conv->Vin_V}, std::pair{"Imax_A", conv->Imax_A}}) {
            if (!(v > 0.0)) throw invalid(sec, key, "must be positive");
        }
    }

    f.control.k1 = get("control", "k1", 0.0);
    f.control.k2 = get("control", "k2", 0.0);
    f.control.duty_min = get("control", "duty_min", 0.0);
    f.control.duty_max = get("control", "duty_max", 1.0);
    f.control.x_guard = get("control", "x_guard", kDefaultXGuard);
    if (!(f.control.k1 > 0.0)) throw invalid("control", "k1", "must be positive");
    if (!(f.control.k2 > 0.0)) throw invalid("control", "k2", "must be positive");
    if (!(f.control.x_guard > 0.0)) throw invalid("control", "x_guard", "must be positive");
    if (!(f.control.duty_min >= 0.0)) throw invalid("control", "duty_min", "must be >= 0");
    if (!(f.control.duty_max <= 1.0)) throw invalid("control", "duty_max", "must be <= 1");
    if (!(f.control.duty_min < f.control.duty_max)) {
        throw invalid("control", "duty_max", "duty_min must be below duty_max");
    }

    for (const auto& [t_entry, r_entry] : load_lines) {
        const double t = number(t_entry, "load time");
        const double R = number(r_entry, "load resistance");
        if (!(R > 0.0)) throw ParseError(Kind::invalid_value, r_entry.line, t_entry.value, "load resistance must be positive");
        if (f.load.empty() ? t != 0.0 : !(t > f.load.back().t)) {
            throw ParseError(Kind::invalid_value, t_entry.line, t_entry.value,
                             f.load.empty() ? "first load entry must be at t = 0"
                                            : "load times must be strictly increasing");
        }
        f.load.push_back({t, R});
    }

    f.Vref_V = get("sim", "Vref_V", 0.0);
    if (!(f.Vref_V > 0.0)) throw invalid("sim", "Vref_V", "must be positive");
    if (f.Vref_V >= std::min(f.converter1.Vin_V, f.converter2.Vin_V)) {
        throw invalid("sim", "Vref_V", "Vref must be below input voltage");
    }
    f.dt_s = get("sim", "dt_s", 1e-6);
    if (!(f.dt_s > 0.0)) throw invalid("sim", "dt_s", "must be positive");
    f.t_end_s = get("sim", "t_end_s", 0.1);
    if (!(f.t_end_s >= 0.0)) throw invalid("sim", "t_end_s", "must be non-negative");

    if (raw["sim"].contains("record_every")) {
        const auto& e = raw["sim"]["record_every"];
        auto n = text::parse_integer(e.value);
        if (!n) throw ParseError(Kind::non_numeric, e.line, "record_every", "not an integer: '" + e.value + "'");
        if (*n < 1 || *n > 1'000'000'000) throw invalid("sim", "record_every", "must be a positive integer");
        f.record_every = static_cast<int>(*n);
    }
    if (raw["sim"].contains("init")) {
        const auto& e = raw["sim"]["init"];
        if (e.value == "zero") {
            f.init = InitMode::zero;
        } else if (e.value == "equilibrium") {
            f.init = InitMode::equilibrium;
        } else {
            throw ParseError(Kind::invalid_value, e.line, "init", "expected 'zero' or 'equilibrium'");
        }
    }
    if (raw["sim"].contains("d2_init")) {
        if (f.init != InitMode::zero) throw invalid("sim", "d2_init", "only applies to init = zero");
        f.d2_init = get("sim", "d2_init", 0.0);
        if (f.d2_init < 0.0 || f.d2_init > 1.0) throw invalid("sim", "d2_init", "must lie in [0, 1]");
    }

    // Cross-parameter checks that need SI values.
    const auto sc = f.to_scenario();
    try {
        x_constant(sc.p1, sc.p2, sc.gains.x_guard);
    } catch (const DegenerateConfiguration& ex) {
        throw invalid("converter2", "Imax_A", ex.what());
    }
    try {
        validate(sc);
    } catch (const Error& ex) {
        throw ParseError(Kind::invalid_value, 0, "", ex.what());
    }
    return f;
}

/// Parse, validate and convert to SI.
inline Scenario parse_scenario(std::string_view text) { return parse_scenario_file(text).to_scenario(); }

/// Canonical text form; parse_scenario_file(to_text(f)) == f.
inline std::string to_text(const ScenarioFile& f) {
    using text::format_number;
    std::string out;
    auto kv = [&](const char* key, const std::string& value) { out += std::string(key) + " = " + value + "\n"; };
    for (auto [name, c] : {std::pair{"converter1", &f.converter1}, std::pair{"converter2", &f.converter2}}) {
        out += "[" + std::string(name) + "]\n";
        kv("L_mH", format_number(c->L_mH));
        kv("C_uF", format_number(c->C_uF));
        kv("Vin_V", format_number(c->Vin_V));
        kv("Imax_A", format_number(c->Imax_A));
        out += "\n";
    }
    out += "[control]\n";
    kv("k1", format_number(f.control.k1));
    kv("k2", format_number(f.control.k2));
    kv("duty_min", format_number(f.control.duty_min));
    kv("duty_max", format_number(f.control.duty_max));
    kv("x_guard", format_number(f.control.x_guard));
    out += "\n[load]\n";
    for (const auto& s : f.load) out += format_number(s.t) + " = " + format_number(s.R) + "\n";
    out += "\n[sim]\n";
    kv("Vref_V", format_number(f.Vref_V));
    kv("dt_s", format_number(f.dt_s));
    kv("t_end_s", format_number(f.t_end_s));
    kv("record_every", std::to_string(f.record_every));
    kv("init", f.init == InitMode::zero ? "zero" : "equilibrium");
    if (f.init == InitMode::zero) kv("d2_init", format_number(f.d2_init));
    return out;
}

}  // namespace pbuck
