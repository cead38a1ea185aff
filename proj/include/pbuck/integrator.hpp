#pragma once

#include <concepts>
#include <utility>

namespace pbuck {

/// Classical fourth-order Runge-Kutta advance of x' = f(t, x) by one step h.
///
/// `State + double*Rate` and `Rate + Rate` must be defined; plain scalars work
/// out of the box. The rate function sees every stage state, so it is the
/// natural place to reject non-finite intermediate values.
template <class State, class RateFn>
    requires std::invocable<RateFn&, double, const State&>
State rk4_advance(const State& x, double t, double h, RateFn&& f) {
    const auto k1 = f(t, x);
    const auto k2 = f(t + 0.5 * h, x + (0.5 * h) * k1);
    const auto k3 = f(t + 0.5 * h, x + (0.5 * h) * k2);
    const auto k4 = f(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace pbuck
