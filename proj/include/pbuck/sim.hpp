#pragma once

// Fixed-step closed-loop simulation: RK4 over plant + continuous controller,
// piecewise-constant load schedule, trace recording.

#include "pbuck/control.hpp"
#include "pbuck/errors.hpp"
#include "pbuck/integrator.hpp"
#include "pbuck/model.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <locale>
#include <sstream>
#include <string>
#include <vector>

namespace pbuck {

struct LoadStep {
    double t = 0.0;  ///< [s]
    double R = 10.0; ///< [ohm]

    bool operator==(const LoadStep&) const = default;
};

using LoadSchedule = std::vector<LoadStep>;

inline void validate_schedule(const LoadSchedule& schedule) {
    if (schedule.empty()) throw ScheduleError("load schedule is empty");
    if (schedule.front().t != 0.0) throw ScheduleError("load schedule must start at t = 0");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& s = schedule[i];
        if (!std::isfinite(s.t) || !std::isfinite(s.R) || !(s.R > 0.0)) {
            throw ScheduleError("load schedule entry " + std::to_string(i) + " needs finite t and R > 0");
        }
        if (i > 0 && !(s.t > schedule[i - 1].t)) {
            throw ScheduleError("load schedule times must be strictly increasing");
        }
    }
}

/// Resistance in force at time t. An event at t_k already applies at t_k.
inline double active_load(const LoadSchedule& schedule, double t) {
    if (schedule.empty() || t < schedule.front().t) {
        throw ScheduleError("time precedes the first load schedule entry");
    }
    auto it = std::upper_bound(schedule.begin(), schedule.end(), t,
                               [](double tt, const LoadStep& s) { return tt < s.t; });
    return std::prev(it)->R;
}

struct Scenario {
    ConverterParams p1{1e-3, 10e-6, 16.0, 5.0};
    ConverterParams p2{1e-3, 10e-6, 16.0, 2.0};
    ControlGains gains{};
    double Vref = 8.0;
    LoadSchedule load{{0.0, 10.0}};
    double dt = 1e-6;
    double t_end = 0.1;
    PlantState initial_state{};

    bool operator==(const Scenario&) const = default;
};

inline void validate(const Scenario& sc) {
    validate(sc.p1, "converter1");
    validate(sc.p2, "converter2");
    validate(sc.gains);
    validate_schedule(sc.load);
    if (!(sc.dt > 0.0) || !std::isfinite(sc.dt)) throw ParameterError("dt must be positive");
    if (!(sc.t_end >= 0.0) || !std::isfinite(sc.t_end)) throw ParameterError("t_end must be non-negative");
    if (!(sc.Vref > 0.0) || !std::isfinite(sc.Vref)) throw ParameterError("Vref must be positive");
    if (sc.Vref >= std::min(sc.p1.Vin, sc.p2.Vin)) {
        throw InfeasibleOperatingPoint("Vref must be below input voltage");
    }
    if (!is_finite(sc.initial_state)) throw ParameterError("initial state must be finite");
    if (sc.initial_state.d2 < 0.0 || sc.initial_state.d2 > 1.0) {
        throw ParameterError("initial d2 must lie in [0, 1]");
    }
    x_constant(sc.p1, sc.p2, sc.gains.x_guard);
}

inline constexpr double kDefaultCcmTol = 1e-9;

/// Stage values beyond this multiple of the physical scale (Imax, Vin, unit
/// duty) are treated as numerical blow-up.
inline constexpr double kDivergenceFactor = 1e3;

struct RunOptions {
    int record_every = 50;
    bool enforce_ccm = true;
    double ccm_tol = kDefaultCcmTol;
};

struct TraceRecord {
    double t = 0.0;
    double iL1 = 0.0;
    double iL2 = 0.0;
    double Vo = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d2_dot = 0.0;
    double e = 0.0;
    double e2 = 0.0;
    double V1_lyap = 0.0;
    double V2_lyap = 0.0;
    double per_unit_diff = 0.0;
    double R_active = 0.0;
    bool sat1 = false;
    bool sat2 = false;

    bool operator==(const TraceRecord&) const = default;
};

using Trace = std::vector<TraceRecord>;

namespace detail {

inline std::string format_time(double t) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << t;
    return os.str();
}

inline void check_stage(const PlantState& s, double t, const Scenario& sc) {
    struct Component {
        const char* name;
        double value;
        double limit;
    };
    const Component parts[] = {
        {"iL1", s.iL1, kDivergenceFactor * sc.p1.Imax},
        {"iL2", s.iL2, kDivergenceFactor * sc.p2.Imax},
        {"Vo", s.Vo, kDivergenceFactor * std::max(sc.p1.Vin, sc.p2.Vin)},
        {"d2", s.d2, kDivergenceFactor},
    };
    for (const auto& c : parts) {
        if (!std::isfinite(c.value) || std::abs(c.value) > c.limit) {
            throw DivergenceError("integration diverged at t=" + format_time(t) + " s: " + c.name + " = " +
                                      format_time(c.value),
                                  t, c.name);
        }
    }
}

struct StepResult {
    PlantState state;
    bool d2_clamped = false;
};

inline StepResult advance(const PlantState& state, double t, double h, const Scenario& sc, double R) {
    auto rate = [&](double tt, const PlantState& x) {
        check_stage(x, tt, sc);
        const auto u = controller_step(x, sc.Vref, R, sc.p1, sc.p2, sc.gains);
        return plant_derivatives(x, sc.p1, sc.p2, R, u.d1, u.d2_dot);
    };
    StepResult out{rk4_advance(state, t, h, rate)};
    check_stage(out.state, t + h, sc);
    const double d2 = std::clamp(out.state.d2, 0.0, 1.0);
    out.d2_clamped = d2 != out.state.d2;
    out.state.d2 = d2;
    return out;
}

/// -1: d1 clamped at duty_min, +1: clamped at duty_max, 0: free.
inline int d1_region(const PlantState& s, const Scenario& sc, double R) {
    const double raw = controller_step(s, sc.Vref, R, sc.p1, sc.p2, sc.gains).d1_raw;
    if (raw < sc.gains.duty_min) return -1;
    if (raw > sc.gains.duty_max) return 1;
    return 0;
}

/// Like advance(), but when d1 enters or leaves saturation inside the step
/// the crossing instant is located by bisection and the step is split there,
/// so the right-hand side is smooth on every sub-step.
inline StepResult advance_split(const PlantState& state, double t, double h, const Scenario& sc, double R,
                                int depth = 0) {
    auto full = advance(state, t, h, sc, R);
    const int r0 = d1_region(state, sc, R);
    const int r1 = d1_region(full.state, sc, R);
    if (r0 == r1 || depth >= 4) return full;

    // Boundary on the side of the region being left (or entered from free).
    const double bound = (r0 > 0 || (r0 == 0 && r1 > 0)) ? sc.gains.duty_max : sc.gains.duty_min;
    auto g = [&](double tau) {
        const auto x = advance(state, t, tau, sc, R).state;
        return controller_step(x, sc.Vref, R, sc.p1, sc.p2, sc.gains).d1_raw - bound;
    };
    const double g0 = controller_step(state, sc.Vref, R, sc.p1, sc.p2, sc.gains).d1_raw - bound;
    double lo = 0.0, hi = h;
    if (g0 == 0.0 || (g0 > 0.0) == (g(h) > 0.0)) return full;
    for (int it = 0; it < 60 && hi - lo > 1e-14 * h; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((g(mid) > 0.0) == (g0 > 0.0)) lo = mid; else hi = mid;
    }
    const double tau = hi;
    if (tau >= h) return full;
    auto first = advance(state, t, tau, sc, R);
    auto rest = advance_split(first.state, t + tau, h - tau, sc, R, depth + 1);
    rest.d2_clamped = rest.d2_clamped || first.d2_clamped;
    return rest;
}

}  // namespace detail

/// One RK4 step with the controller re-evaluated at every stage. The load is
/// the one active at `t`; d2 is clamped to [0, 1] afterwards.
inline PlantState rk4_step(const PlantState& state, double t, double dt, const Scenario& scenario) {
    if (!(dt > 0.0)) throw ParameterError("rk4_step: dt must be positive");
    return detail::advance(state, t, dt, scenario, active_load(scenario.load, t)).state;
}

/// Snapshot of state plus controller diagnostics at time t under load R.
inline TraceRecord make_record(double t, const PlantState& s, const Scenario& sc, double R, bool d2_clamped) {
    const auto u = controller_step(s, sc.Vref, R, sc.p1, sc.p2, sc.gains);
    TraceRecord r;
    r.t = t;
    r.iL1 = s.iL1;
    r.iL2 = s.iL2;
    r.Vo = s.Vo;
    r.d1 = u.d1;
    r.d2 = s.d2;
    r.d2_dot = u.d2_dot;
    r.e = u.e;
    r.e2 = u.e2;
    r.V1_lyap = u.V1_lyap;
    r.V2_lyap = u.V2_lyap;
    r.per_unit_diff = u.e2;
    r.R_active = R;
    r.sat1 = u.sat1;
    // Converter-2 duty is pinned at a bound and the command pushes further out.
    r.sat2 = d2_clamped || (s.d2 <= 0.0 && u.d2_dot < 0.0) || (s.d2 >= 1.0 && u.d2_dot > 0.0);
    return r;
}

/// Integrate the closed loop from t = 0 to scenario.t_end.
///
/// Records the initial state, every `record_every`-th step, the final state,
/// and both sides of each load event. Steps are shortened where needed so
/// that every event time is a step boundary; steps in which d1 switches
/// between clamped and free are split at the switching instant.
inline Trace run(const Scenario& sc, const RunOptions& opts = {}) {
    validate(sc);
    if (opts.record_every < 1) throw ParameterError("record_every must be a positive integer");

    auto check_ccm = [&](const PlantState& s, double t) {
        if (opts.enforce_ccm && std::min(s.iL1, s.iL2) < -opts.ccm_tol) {
            throw CcmViolation("inductor current went negative at t=" + detail::format_time(t) +
                                   " s (iL1=" + detail::format_time(s.iL1) +
                                   " A, iL2=" + detail::format_time(s.iL2) + " A)",
                               t);
        }
    };

    Trace trace;
    PlantState state = sc.initial_state;
    check_ccm(state, 0.0);
    trace.push_back(make_record(0.0, state, sc, active_load(sc.load, 0.0), false));
    if (sc.t_end == 0.0) return trace;

    std::vector<double> bounds;
    for (const auto& ev : sc.load) {
        if (ev.t > 0.0 && ev.t < sc.t_end) bounds.push_back(ev.t);
    }
    bounds.push_back(sc.t_end);

    trace.reserve(static_cast<std::size_t>(sc.t_end / sc.dt) / static_cast<std::size_t>(opts.record_every) +
                  2 * bounds.size() + 2);

    long long step_count = 0;
    bool d2_clamped = false;
    double seg_start = 0.0;
    for (std::size_t b = 0; b < bounds.size(); ++b) {
        const double seg_end = bounds[b];
        const double R = active_load(sc.load, seg_start);
        const auto n = std::max<long long>(1, static_cast<long long>(std::ceil((seg_end - seg_start) / sc.dt - 1e-6)));
        for (long long k = 0; k < n; ++k) {
            const double t0 = seg_start + static_cast<double>(k) * sc.dt;
            const double t1 = (k == n - 1) ? seg_end : seg_start + static_cast<double>(k + 1) * sc.dt;
            const auto step = detail::advance_split(state, t0, t1 - t0, sc, R);
            state = step.state;
            d2_clamped = step.d2_clamped;
            ++step_count;
            check_ccm(state, t1);
            const bool last = (b + 1 == bounds.size()) && (k == n - 1);
            if (step_count % opts.record_every == 0 || last) {
                trace.push_back(make_record(t1, state, sc, R, d2_clamped));
            }
        }
        if (b + 1 < bounds.size()) {
            if (trace.back().t != seg_end) {
                trace.push_back(make_record(seg_end, state, sc, R, d2_clamped));
            }
            trace.push_back(make_record(seg_end, state, sc, active_load(sc.load, seg_end), d2_clamped));
        }
        seg_start = seg_end;
    }
    return trace;
}

}  // namespace pbuck
