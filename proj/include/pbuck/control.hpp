#pragma once

// Backstepping control laws for the parallel buck pair.
//
// Converter 1 regulates the output voltage: its inductor current is the
// virtual control for the voltage error e = Vref - Vo, and the duty d1 is
// chosen so that the Lyapunov function V1 = (e^2 + i~^2)/2 decays as
//   dV1/dt = -(e^2/C)(1/R + k1) - i~^2.
//
// Converter 2 enforces proportional sharing: the output voltage is the
// virtual control for the per-unit error e2 = iL1/I1m - iL2/I2m, and the
// duty *rate* is chosen so that V2 = (e2^2 + Vo~^2)/2 decays as
//   dV2/dt = -k2 e2^2 - Vo~^2   (with d1 frozen).
//
// The virtual-control law uses the unscaled iL2 (iL1D = Vref/R - iL2 + k1 e)
// and the W1 feed-forward uses -diL2/dt. Duty denominators are the converter
// input voltages.

#include "pbuck/errors.hpp"
#include "pbuck/model.hpp"

#include <algorithm>
#include <cmath>

namespace pbuck {

inline constexpr double kDefaultXGuard = 1e-3;

struct ControlGains {
    double k1 = 1.0;       ///< voltage-loop gain [1/ohm]
    double k2 = 1.0;       ///< sharing-loop gain [1/s]
    double x_guard = kDefaultXGuard;
    double duty_min = 0.0;
    double duty_max = 1.0;

    bool operator==(const ControlGains&) const = default;
};

inline void validate(const ControlGains& g) {
    if (!(g.k1 > 0.0) || !std::isfinite(g.k1)) throw ParameterError("k1 must be positive");
    if (!(g.k2 > 0.0) || !std::isfinite(g.k2)) throw ParameterError("k2 must be positive");
    if (!(g.x_guard > 0.0) || !std::isfinite(g.x_guard)) throw ParameterError("x_guard must be positive");
    if (!(g.duty_min >= 0.0 && g.duty_min < g.duty_max && g.duty_max <= 1.0)) {
        throw ParameterError("duty bounds must satisfy 0 <= duty_min < duty_max <= 1");
    }
}

struct ControlSignals {
    double d1 = 0.0;
    double d1_raw = 0.0;   ///< d1 before clamping
    double d2_dot = 0.0;
    double e = 0.0;        ///< Vref - Vo [V]
    double e2 = 0.0;       ///< per-unit sharing error
    double i_tilde = 0.0;  ///< iL1D - iL1 [A]
    double v_tilde = 0.0;  ///< VoD - Vo [V]
    double V1_lyap = 0.0;
    double V2_lyap = 0.0;
    bool sat1 = false;     ///< d1 was clamped
};

struct DutyCommand {
    double d = 0.0;
    bool saturated = false;
};

inline double voltage_error(const PlantState& state, double Vref) { return Vref - state.Vo; }

inline double desired_iL1(const PlantState& state, double Vref, double R, const ControlGains& gains) {
    return Vref / R - state.iL2 + gains.k1 * voltage_error(state, Vref);
}

/// Commanded diL1/dt.
inline double w1(double diL2, double e, double e_dot, double i_tilde, const ControlGains& gains,
                 double Ctot) {
    return -diL2 + i_tilde + e / Ctot + gains.k1 * e_dot;
}

inline double duty1_unclamped(double W1, double Vo, const ConverterParams& p1) {
    return (p1.L * W1 + Vo) / p1.Vin;
}

inline DutyCommand duty1(double W1, double Vo, const ConverterParams& p1, const ControlGains& gains) {
    if (!(p1.Vin > 0.0)) {
        throw ParameterError("duty1: converter-1 input voltage must be positive");
    }
    const double raw = duty1_unclamped(W1, Vo, p1);
    const double d = std::clamp(raw, gains.duty_min, gains.duty_max);
    return {d, d != raw};
}

inline double sharing_error(const PlantState& state, const ConverterParams& p1, const ConverterParams& p2) {
    return state.iL1 / p1.Imax - state.iL2 / p2.Imax;
}

/// Coupling coefficient 1/(I2m L2) - 1/(I1m L1) of the sharing-error dynamics.
inline double x_constant(const ConverterParams& p1, const ConverterParams& p2,
                         double x_guard = kDefaultXGuard) {
    const double X = 1.0 / (p2.Imax * p2.L) - 1.0 / (p1.Imax * p1.L);
    if (!(std::abs(X) >= x_guard)) {
        throw DegenerateConfiguration(
            "rated ampere-henry products of the two converters are too close (|X| below x_guard); "
            "the sharing law is ill-conditioned");
    }
    return X;
}

inline double desired_vo(double d1, double d2, double e2, const ConverterParams& p1,
                         const ConverterParams& p2, const ControlGains& gains) {
    const double X = x_constant(p1, p2, gains.x_guard);
    return (-d1 * p1.Vin / (p1.Imax * p1.L) + d2 * p2.Vin / (p2.Imax * p2.L) - gains.k2 * e2) / X;
}

/// Converter-2 duty-rate command. `e2_dot` is the measured (model-based)
/// sharing-error rate and `vo_dot` the output-voltage rate.
inline double duty2_rate(double e2, double e2_dot, double v_tilde, double vo_dot,
                         const ConverterParams& p2, double X, const ControlGains& gains) {
    return (p2.Imax * p2.L / p2.Vin) * (X * (vo_dot + X * e2 - v_tilde) + gains.k2 * e2_dot);
}

inline double lyapunov_v1(double e, double i_tilde) { return 0.5 * (e * e + i_tilde * i_tilde); }

inline double lyapunov_v2(double e2, double v_tilde) { return 0.5 * (e2 * e2 + v_tilde * v_tilde); }

/// One measurement -> command evaluation of both controllers.
inline ControlSignals controller_step(const PlantState& state, double Vref, double R,
                                      const ConverterParams& p1, const ConverterParams& p2,
                                      const ControlGains& gains) {
    const double Ctot = total_capacitance(p1, p2);
    ControlSignals out;

    // Voltage loop.
    out.e = voltage_error(state, Vref);
    const double vo_dot = (state.iL1 + state.iL2 - state.Vo / R) / Ctot;
    const double e_dot = -vo_dot;
    out.i_tilde = desired_iL1(state, Vref, R, gains) - state.iL1;
    const double diL2 = (state.d2 * p2.Vin - state.Vo) / p2.L;
    const double W1 = w1(diL2, out.e, e_dot, out.i_tilde, gains, Ctot);
    const auto cmd = duty1(W1, state.Vo, p1, gains);
    out.d1_raw = duty1_unclamped(W1, state.Vo, p1);
    out.d1 = cmd.d;
    out.sat1 = cmd.saturated;

    // Sharing loop.
    const double a1 = 1.0 / (p1.Imax * p1.L);
    const double a2 = 1.0 / (p2.Imax * p2.L);
    out.e2 = sharing_error(state, p1, p2);
    const double X = x_constant(p1, p2, gains.x_guard);
    const double e2_dot = a1 * (out.d1 * p1.Vin - state.Vo) - a2 * (state.d2 * p2.Vin - state.Vo);
    out.v_tilde = desired_vo(out.d1, state.d2, out.e2, p1, p2, gains) - state.Vo;
    out.d2_dot = duty2_rate(out.e2, e2_dot, out.v_tilde, vo_dot, p2, X, gains);

    out.V1_lyap = lyapunov_v1(out.e, out.i_tilde);
    out.V2_lyap = lyapunov_v2(out.e2, out.v_tilde);
    return out;
}

}  // namespace pbuck
