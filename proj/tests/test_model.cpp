#include <catch_amalgamated.hpp>

#include "pbuck/model.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace pbuck;
using Catch::Approx;

namespace {

const ConverterParams kConv1{1e-3, 10e-6, 16.0, 5.0};
const ConverterParams kConv2{1e-3, 10e-6, 16.0, 2.0};

double norm(const PlantStateDerivative& d) {
    return std::sqrt(d.diL1 * d.diL1 + d.diL2 * d.diL2 + d.dVo * d.dVo + d.dd2 * d.dd2);
}

// Steady currents from iL1 + iL2 = Vref/R and iL1/I1m = iL2/I2m, by Cramer's rule.
std::pair<double, double> steady_currents(double I1m, double I2m, double R, double Vref) {
    const double a11 = 1.0, a12 = 1.0, b1 = Vref / R;
    const double a21 = 1.0 / I1m, a22 = -1.0 / I2m, b2 = 0.0;
    const double det = a11 * a22 - a12 * a21;
    return {(b1 * a22 - a12 * b2) / det, (a11 * b2 - b1 * a21) / det};
}

}  // namespace

TEST_CASE("zero state with zero inputs is a fixed point", "[model]") {
    const auto d = plant_derivatives(PlantState{}, kConv1, kConv2, 10.0, 0.0, 0.0);
    CHECK(d == PlantStateDerivative{});
}

TEST_CASE("rated 5:2 split at Vo = 8 V is stationary", "[model]") {
    const PlantState s{4.0 / 7.0, 8.0 / 35.0, 8.0, 0.5};
    const auto d = plant_derivatives(s, kConv1, kConv2, 10.0, 0.5, 0.0);
    CHECK(norm(d) < 1e-9);

    // Rounded values still land near the equilibrium.
    const auto rounded = plant_derivatives({0.5714, 0.2286, 8.0, 0.5}, kConv1, kConv2, 10.0, 0.5, 0.0);
    CHECK(std::abs(rounded.diL1) < 1e-9);
    CHECK(std::abs(rounded.dVo) < 1.0);
}

TEST_CASE("full duty from rest ramps both inductors at Vin/L", "[model]") {
    const auto d = plant_derivatives({0.0, 0.0, 0.0, 1.0}, kConv1, kConv2, 10.0, 1.0, 0.0);
    CHECK(d.diL1 == Approx(16000.0));
    CHECK(d.diL2 == Approx(16000.0));
    CHECK(d.dVo == 0.0);
}

TEST_CASE("duty rate passes straight through", "[model]") {
    CHECK(plant_derivatives({}, kConv1, kConv2, 10.0, 0.0, 3.5).dd2 == 3.5);
}

TEST_CASE("plant_derivatives rejects bad input", "[model][errors]") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(plant_derivatives({nan, 0, 0, 0}, kConv1, kConv2, 10.0, 0.5, 0.0), NumericDomainError);
    CHECK_THROWS_AS(plant_derivatives({0, 0, inf, 0}, kConv1, kConv2, 10.0, 0.5, 0.0), NumericDomainError);
    CHECK_THROWS_AS(plant_derivatives({}, kConv1, kConv2, 10.0, nan, 0.0), NumericDomainError);
    CHECK_THROWS_AS(plant_derivatives({}, kConv1, kConv2, 10.0, 0.5, inf), NumericDomainError);
    CHECK_THROWS_AS(plant_derivatives({}, kConv1, kConv2, 0.0, 0.5, 0.0), ParameterError);
    CHECK_THROWS_AS(plant_derivatives({}, kConv1, kConv2, 10.0, 1.5, 0.0), ParameterError);
}

TEST_CASE("equilibrium matches the linear-solve oracle", "[model][oracle]") {
    for (double R : {10.0, 15.0, 3.3, 100.0}) {
        const auto [i1, i2] = steady_currents(5.0, 2.0, R, 8.0);
        const auto eq = equilibrium(kConv1, kConv2, R, 8.0);
        CHECK(eq.iL1 == Approx(i1).epsilon(1e-14));
        CHECK(eq.iL2 == Approx(i2).epsilon(1e-14));
        CHECK(eq.Vo == 8.0);
        CHECK(eq.d2 == 0.5);
    }
    const auto eq10 = equilibrium(kConv1, kConv2, 10.0, 8.0);
    CHECK(eq10.iL1 == Approx(0.57143).margin(5e-6));
    CHECK(eq10.iL2 == Approx(0.22857).margin(5e-6));
    const auto eq15 = equilibrium(kConv1, kConv2, 15.0, 8.0);
    CHECK(eq15.iL1 == Approx(0.38095).margin(5e-6));
    CHECK(eq15.iL2 == Approx(0.15238).margin(5e-6));
}

TEST_CASE("equal ratings split the load exactly in half", "[model]") {
    auto p2 = kConv1;
    for (double R : {1.0, 7.0, 10.0, 42.0}) {
        const auto eq = equilibrium(kConv1, p2, R, 8.0);
        CHECK(eq.iL1 == eq.iL2);
    }
}

TEST_CASE("equilibrium rejects a setpoint at or above the input voltage", "[model][errors]") {
    CHECK_THROWS_AS(equilibrium(kConv1, kConv2, 10.0, 16.0), InfeasibleOperatingPoint);
    CHECK_THROWS_AS(equilibrium(kConv1, kConv2, 10.0, 20.0), InfeasibleOperatingPoint);
    auto low = kConv2;
    low.Vin = 7.0;
    CHECK_THROWS_AS(equilibrium(kConv1, low, 10.0, 8.0), InfeasibleOperatingPoint);
    CHECK_THROWS_AS(equilibrium(kConv1, kConv2, 0.0, 8.0), ParameterError);
}

TEST_CASE("model properties on random states", "[model][property]") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> cur(-2.0, 6.0), volt(0.0, 15.0), duty(0.0, 1.0), frac(0.0, 1.0);
    std::uniform_real_distribution<double> res(1.0, 50.0), vref(1.0, 15.0);

    for (int i = 0; i < 500; ++i) {
        const PlantState a{cur(rng), cur(rng), volt(rng), duty(rng)};
        const PlantState b{cur(rng), cur(rng), volt(rng), duty(rng)};
        const double lam = frac(rng), R = res(rng), d1 = duty(rng);

        // Affine in the state for fixed duties: f(mix) = mix of f.
        const PlantState mix{lam * a.iL1 + (1 - lam) * b.iL1, lam * a.iL2 + (1 - lam) * b.iL2,
                             lam * a.Vo + (1 - lam) * b.Vo, lam * a.d2 + (1 - lam) * b.d2};
        const auto fa = plant_derivatives(a, kConv1, kConv2, R, d1, 0.0);
        const auto fb = plant_derivatives(b, kConv1, kConv2, R, d1, 0.0);
        const auto fm = plant_derivatives(mix, kConv1, kConv2, R, d1, 0.0);
        CHECK(fm.diL1 == Approx(lam * fa.diL1 + (1 - lam) * fb.diL1).margin(1e-6));
        CHECK(fm.diL2 == Approx(lam * fa.diL2 + (1 - lam) * fb.diL2).margin(1e-6));
        CHECK(fm.dVo == Approx(lam * fa.dVo + (1 - lam) * fb.dVo).margin(1e-6));

        // Equilibrium is stationary under its own duties. Compared as the
        // inductor-voltage / node-current balance (L di/dt, C dVo/dt): the raw
        // rates carry a 1/C = 5e4 amplification of current rounding.
        const double Vr = vref(rng);
        const auto eq = equilibrium(kConv1, kConv2, R, Vr);
        const auto feq = plant_derivatives(eq, kConv1, kConv2, R, Vr / kConv1.Vin, 0.0);
        const PlantStateDerivative balance{kConv1.L * feq.diL1, kConv2.L * feq.diL2,
                                           total_capacitance(kConv1, kConv2) * feq.dVo, feq.dd2};
        CHECK(norm(balance) < 1e-12);
        CHECK(norm(feq) < 1e-10);

        // Inductor voltage sign.
        if (a.Vo < d1 * kConv1.Vin) CHECK(fa.diL1 > 0.0);
        if (a.Vo < a.d2 * kConv2.Vin) CHECK(fa.diL2 > 0.0);
    }
}

TEST_CASE("converter parameter validation", "[model][errors]") {
    CHECK_NOTHROW(validate(kConv1));
    auto bad = kConv1;
    bad.L = 0.0;
    CHECK_THROWS_AS(validate(bad), ParameterError);
    bad = kConv1;
    bad.Imax = -1.0;
    CHECK_THROWS_AS(validate(bad), ParameterError);
    bad = kConv1;
    bad.Vin = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate(bad), ParameterError);
}
