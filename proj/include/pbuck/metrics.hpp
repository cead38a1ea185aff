#pragma once

// Scalar performance figures extracted from a simulation trace.

#include "pbuck/errors.hpp"
#include "pbuck/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>

namespace pbuck {

struct MetricsOptions {
    double band = 0.02;             ///< relative voltage band around Vref
    double share_threshold = 1e-3;  ///< per-unit sharing threshold
    double lyap_tol = 1e-9;         ///< allowed per-sample increase of V1 / V2
    double lyap_after = 0.0;        ///< ignore Lyapunov samples before this time [s]
};

struct RunMetrics {
    std::optional<double> settle_time_v;      ///< empty: still outside the band at the end
    std::optional<double> settle_time_share;
    double ss_voltage_error = 0.0;            ///< mean |e| over final 10 % of the trace [V]
    double ss_sharing_error = 0.0;            ///< mean |e2| over final 10 %
    std::optional<double> recovery_time;      ///< settle time measured from the last load event [s]
    double lyap_violation_fraction = 0.0;
    std::size_t lyap_samples = 0;             ///< unsaturated sample pairs examined
    double max_duty_saturation_time = 0.0;    ///< longest saturated stretch [s]
};

namespace detail {

/// Time of the first sample after which `inside` holds for every remaining
/// sample in [first, trace.size()).
inline std::optional<double> settle_from(const Trace& trace, std::size_t first,
                                         const std::function<bool(const TraceRecord&)>& inside) {
    if (first >= trace.size() || !inside(trace.back())) return std::nullopt;
    std::size_t i = trace.size() - 1;
    while (i > first && inside(trace[i - 1])) --i;
    return trace[i].t;
}

}  // namespace detail

inline RunMetrics compute_metrics(const Trace& trace, double Vref, const MetricsOptions& opts = {}) {
    if (trace.empty()) throw InputError("compute_metrics: empty trace");
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i].t < trace[i - 1].t) throw InputError("compute_metrics: trace is not time-sorted");
    }

    const auto v_in = [&](const TraceRecord& r) { return std::abs(r.Vo - Vref) / Vref < opts.band; };
    const auto s_in = [&](const TraceRecord& r) { return std::abs(r.e2) < opts.share_threshold; };

    RunMetrics m;
    m.settle_time_v = detail::settle_from(trace, 0, v_in);
    m.settle_time_share = detail::settle_from(trace, 0, s_in);

    const double t0 = trace.front().t;
    const double t1 = trace.back().t;
    const double tail_start = t1 - 0.1 * (t1 - t0);
    std::size_t tail_n = 0;
    for (const auto& r : trace) {
        if (r.t >= tail_start) {
            m.ss_voltage_error += std::abs(r.e);
            m.ss_sharing_error += std::abs(r.e2);
            ++tail_n;
        }
    }
    m.ss_voltage_error /= static_cast<double>(tail_n);
    m.ss_sharing_error /= static_cast<double>(tail_n);

    // Last load event: the post-event half of the duplicated record pair.
    std::optional<std::size_t> event_idx;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i].R_active != trace[i - 1].R_active) event_idx = i;
    }
    if (event_idx) {
        const auto both = [&](const TraceRecord& r) { return v_in(r) && s_in(r); };
        if (auto ts = detail::settle_from(trace, *event_idx, both)) {
            m.recovery_time = *ts - trace[*event_idx].t;
        }
    }

    std::size_t violations = 0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        const auto& a = trace[i - 1];
        const auto& b = trace[i];
        if (a.t < opts.lyap_after || !(b.t > a.t) || a.R_active != b.R_active) continue;
        if (a.sat1 || a.sat2 || b.sat1 || b.sat2) continue;
        ++m.lyap_samples;
        if (b.V1_lyap - a.V1_lyap > opts.lyap_tol || b.V2_lyap - a.V2_lyap > opts.lyap_tol) ++violations;
    }
    if (m.lyap_samples > 0) {
        m.lyap_violation_fraction = static_cast<double>(violations) / static_cast<double>(m.lyap_samples);
    }

    bool in_sat = false;
    double sat_since = 0.0;
    for (const auto& r : trace) {
        const bool sat = r.sat1 || r.sat2;
        if (sat && !in_sat) sat_since = r.t;
        if (!sat && in_sat) m.max_duty_saturation_time = std::max(m.max_duty_saturation_time, r.t - sat_since);
        in_sat = sat;
    }
    if (in_sat) m.max_duty_saturation_time = std::max(m.max_duty_saturation_time, t1 - sat_since);

    return m;
}

}  // namespace pbuck
