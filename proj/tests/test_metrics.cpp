#include <catch_amalgamated.hpp>

#include "pbuck/metrics.hpp"

#include <algorithm>
#include <cmath>

using namespace pbuck;
using Catch::Approx;

namespace {

TraceRecord sample(double t, double Vo, double e2, double Vref = 8.0, double R = 10.0) {
    TraceRecord r;
    r.t = t;
    r.Vo = Vo;
    r.e = Vref - Vo;
    r.e2 = e2;
    r.per_unit_diff = e2;
    r.R_active = R;
    return r;
}

Trace flat_trace(int n, double dt) {
    Trace tr;
    for (int i = 0; i <= n; ++i) tr.push_back(sample(i * dt, 8.0, 0.0));
    return tr;
}

}  // namespace

TEST_CASE("trace sitting on the setpoint", "[metrics]") {
    const auto m = compute_metrics(flat_trace(100, 1e-3), 8.0);
    REQUIRE(m.settle_time_v);
    REQUIRE(m.settle_time_share);
    CHECK(*m.settle_time_v == 0.0);
    CHECK(*m.settle_time_share == 0.0);
    CHECK(m.ss_voltage_error == 0.0);
    CHECK(m.ss_sharing_error == 0.0);
    CHECK(m.lyap_violation_fraction == 0.0);
    CHECK(m.lyap_samples == 100);
    CHECK_FALSE(m.recovery_time);
    CHECK(m.max_duty_saturation_time == 0.0);
}

TEST_CASE("settling uses never-leave semantics", "[metrics]") {
    auto tr = flat_trace(100, 1e-3);  // t = 0 .. 0.1
    tr[70].Vo = 9.0;                  // excursion at t = 0.07
    tr[70].e = -1.0;
    const auto m = compute_metrics(tr, 8.0);
    REQUIRE(m.settle_time_v);
    CHECK(*m.settle_time_v > 0.07);
    CHECK(*m.settle_time_v == Approx(0.071));
    CHECK(*m.settle_time_share == 0.0);
}

TEST_CASE("trace ending outside the band never settles", "[metrics]") {
    auto tr = flat_trace(10, 1e-3);
    tr.back().Vo = 7.0;
    tr.back().e2 = 0.5;
    const auto m = compute_metrics(tr, 8.0);
    CHECK_FALSE(m.settle_time_v);
    CHECK_FALSE(m.settle_time_share);
}

TEST_CASE("steady-state errors average the final tenth", "[metrics]") {
    Trace tr;
    for (int i = 0; i <= 100; ++i) {
        const double t = i * 1e-3;
        tr.push_back(sample(t, t >= 0.09 ? 7.9 : 5.0, t >= 0.09 ? 0.002 : 0.5));
    }
    const auto m = compute_metrics(tr, 8.0);
    CHECK(m.ss_voltage_error == Approx(0.1));
    CHECK(m.ss_sharing_error == Approx(0.002));
}

TEST_CASE("widening the band never delays settling", "[metrics][property]") {
    Trace tr;
    for (int i = 0; i <= 1000; ++i) {
        const double t = i * 1e-4;
        tr.push_back(sample(t, 8.0 + 2.0 * std::exp(-60.0 * t) * std::cos(900.0 * t), 0.0));
    }
    double prev = 1e9;
    for (double band : {0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.3}) {
        MetricsOptions o;
        o.band = band;
        const auto m = compute_metrics(tr, 8.0, o);
        REQUIRE(m.settle_time_v);
        CHECK(*m.settle_time_v <= prev);
        prev = *m.settle_time_v;
    }
}

TEST_CASE("recovery after a load event", "[metrics]") {
    Trace tr;
    for (int i = 0; i <= 50; ++i) tr.push_back(sample(i * 1e-3, 8.0, 0.0, 8.0, 10.0));
    tr.push_back(sample(0.05, 8.0, 0.0, 8.0, 15.0));
    for (int i = 51; i <= 100; ++i) {
        const double t = i * 1e-3;
        const bool recovering = t < 0.06;
        tr.push_back(sample(t, recovering ? 8.5 : 8.0, recovering ? 0.01 : 0.0, 8.0, 15.0));
    }
    const auto m = compute_metrics(tr, 8.0);
    REQUIRE(m.recovery_time);
    CHECK(*m.recovery_time == Approx(0.01));
}

TEST_CASE("Lyapunov increases are counted on unsaturated pairs only", "[metrics]") {
    auto tr = flat_trace(10, 1e-3);
    for (std::size_t i = 0; i < tr.size(); ++i) tr[i].V1_lyap = 1.0 - 0.01 * static_cast<double>(i);
    tr[5].V1_lyap = 2.0;  // pairs (4,5) increase, (5,6) decrease
    auto m = compute_metrics(tr, 8.0);
    CHECK(m.lyap_samples == 10);
    CHECK(m.lyap_violation_fraction == Approx(0.1));

    tr[5].sat1 = true;  // removes pairs (4,5) and (5,6)
    m = compute_metrics(tr, 8.0);
    CHECK(m.lyap_samples == 8);
    CHECK(m.lyap_violation_fraction == 0.0);

    tr[5].sat1 = false;
    MetricsOptions o;
    o.lyap_after = 0.0045;
    m = compute_metrics(tr, 8.0, o);
    CHECK(m.lyap_samples == 5);
    CHECK(m.lyap_violation_fraction == 0.0);

    tr[7].V2_lyap = 1e-10;  // below lyap_tol
    m = compute_metrics(tr, 8.0, o);
    CHECK(m.lyap_violation_fraction == 0.0);
}

TEST_CASE("longest saturation stretch", "[metrics]") {
    auto tr = flat_trace(20, 1e-3);
    for (int i = 2; i < 5; ++i) tr[static_cast<std::size_t>(i)].sat1 = true;   // 0.002 .. 0.005
    for (int i = 10; i < 17; ++i) tr[static_cast<std::size_t>(i)].sat2 = true;  // 0.010 .. 0.017
    CHECK(compute_metrics(tr, 8.0).max_duty_saturation_time == Approx(0.007));
    tr.back().sat1 = true;
    tr[19].sat1 = true;
    tr[18].sat1 = true;
    CHECK(compute_metrics(tr, 8.0).max_duty_saturation_time == Approx(0.007));
}

TEST_CASE("metrics input validation", "[metrics][errors]") {
    CHECK_THROWS_AS(compute_metrics({}, 8.0), InputError);
    auto tr = flat_trace(10, 1e-3);
    std::reverse(tr.begin(), tr.end());
    CHECK_THROWS_AS(compute_metrics(tr, 8.0), InputError);
}

TEST_CASE("metrics survive 2x subsampling of a real run", "[metrics][property]") {
    Scenario sc;
    sc.gains.k2 = 300.0;
    sc.t_end = 0.06;
    sc.dt = 2e-6;
    RunOptions o;
    o.enforce_ccm = false;
    o.record_every = 1;
    const auto fine = compute_metrics(run(sc, o), sc.Vref);
    o.record_every = 2;
    const auto coarse = compute_metrics(run(sc, o), sc.Vref);
    const double period = 2 * sc.dt;
    REQUIRE(fine.settle_time_v);
    REQUIRE(coarse.settle_time_v);
    CHECK(std::abs(*fine.settle_time_v - *coarse.settle_time_v) <= period * (1 + 1e-9));
    REQUIRE(fine.settle_time_share);
    REQUIRE(coarse.settle_time_share);
    CHECK(std::abs(*fine.settle_time_share - *coarse.settle_time_share) <= period * (1 + 1e-9));
    CHECK(std::abs(fine.max_duty_saturation_time - coarse.max_duty_saturation_time) <= period * (1 + 1e-9));
    CHECK(coarse.ss_sharing_error == Approx(fine.ss_sharing_error).epsilon(0.05).margin(1e-12));
    CHECK(coarse.ss_voltage_error == Approx(fine.ss_voltage_error).margin(1e-9));
}
