#pragma once

// Averaged (switching-period mean) model of two buck converters in parallel
// feeding one resistive load through a lumped output capacitance.

#include "pbuck/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pbuck {

/// Per-converter physical constants, SI units.
struct ConverterParams {
    double L = 1e-3;     ///< inductance [H]
    double C = 10e-6;    ///< output capacitance contributed by this stage [F]
    double Vin = 16.0;   ///< input source voltage [V]
    double Imax = 1.0;   ///< rated current [A]

    bool operator==(const ConverterParams&) const = default;
};

inline void validate(const ConverterParams& p, const std::string& name = "converter") {
    auto positive = [&](double v, const char* what) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw ParameterError(name + ": " + what + " must be positive and finite");
        }
    };
    positive(p.L, "L");
    positive(p.C, "C");
    positive(p.Vin, "Vin");
    positive(p.Imax, "Imax");
}

/// Lumped capacitance seen by the common output node.
inline double total_capacitance(const ConverterParams& p1, const ConverterParams& p2) {
    return p1.C + p2.C;
}

/// Dynamic plant variables plus the integrated converter-2 duty.
struct PlantState {
    double iL1 = 0.0;
    double iL2 = 0.0;
    double Vo = 0.0;
    double d2 = 0.0;

    bool operator==(const PlantState&) const = default;
};

struct PlantStateDerivative {
    double diL1 = 0.0;  ///< [A/s]
    double diL2 = 0.0;  ///< [A/s]
    double dVo = 0.0;   ///< [V/s]
    double dd2 = 0.0;   ///< [1/s]

    bool operator==(const PlantStateDerivative&) const = default;
};

inline PlantStateDerivative operator+(const PlantStateDerivative& a, const PlantStateDerivative& b) {
    return {a.diL1 + b.diL1, a.diL2 + b.diL2, a.dVo + b.dVo, a.dd2 + b.dd2};
}

inline PlantStateDerivative operator*(double s, const PlantStateDerivative& d) {
    return {s * d.diL1, s * d.diL2, s * d.dVo, s * d.dd2};
}

inline PlantState operator+(const PlantState& x, const PlantStateDerivative& dx) {
    return {x.iL1 + dx.diL1, x.iL2 + dx.diL2, x.Vo + dx.dVo, x.d2 + dx.dd2};
}

inline bool is_finite(const PlantState& s) {
    return std::isfinite(s.iL1) && std::isfinite(s.iL2) && std::isfinite(s.Vo) && std::isfinite(s.d2);
}

/// Piecewise-constant resistive load value.
struct LoadModel {
    double R = 10.0;  ///< [ohm]
};

/// Right-hand side of the averaged model. The converter-2 duty is taken from
/// the state (it is integrated from the commanded rate `d2_dot`).
inline PlantStateDerivative plant_derivatives(const PlantState& state, const ConverterParams& p1,
                                              const ConverterParams& p2, double R, double d1,
                                              double d2_dot) {
    if (!is_finite(state) || !std::isfinite(R) || !std::isfinite(d1) || !std::isfinite(d2_dot)) {
        throw NumericDomainError("plant_derivatives: non-finite input");
    }
    if (R <= 0.0) {
        throw ParameterError("plant_derivatives: load resistance must be positive");
    }
    if (d1 < 0.0 || d1 > 1.0) {
        throw ParameterError("plant_derivatives: d1 outside [0, 1]");
    }
    PlantStateDerivative d;
    d.diL1 = (d1 * p1.Vin - state.Vo) / p1.L;
    d.diL2 = (state.d2 * p2.Vin - state.Vo) / p2.L;
    d.dVo = (state.iL1 + state.iL2 - state.Vo / R) / total_capacitance(p1, p2);
    d.dd2 = d2_dot;
    return d;
}

/// Steady state with Vo = Vref and currents split in proportion to the ratings.
inline PlantState equilibrium(const ConverterParams& p1, const ConverterParams& p2, double R,
                              double Vref) {
    if (!(R > 0.0)) {
        throw ParameterError("equilibrium: load resistance must be positive");
    }
    if (Vref >= std::min(p1.Vin, p2.Vin)) {
        throw InfeasibleOperatingPoint("equilibrium: Vref must be below input voltage");
    }
    const double total = Vref / R;
    const double rating_sum = p1.Imax + p2.Imax;
    PlantState s;
    s.Vo = Vref;
    s.iL1 = p1.Imax * total / rating_sum;
    s.iL2 = p2.Imax * total / rating_sum;
    s.d2 = Vref / p2.Vin;
    return s;
}

}  // namespace pbuck
