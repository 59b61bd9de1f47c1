// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "vsim/dynamics.hpp"
#include "vsim/observables.hpp"
#include "vsim/units.hpp"

using namespace vsim;

namespace {

SystemParams trap_params(double sink_time_fs) {
    SystemParams p;
    p.sink_target = SinkTarget::Trap;
    p.gamma_t = 1.0 / sink_time_fs;
    return p;
}

SystemParams unitary_params() {
    SystemParams p;
    p.sink_target = SinkTarget::None;
    p.gamma_t = 0.0;
    return p;
}

SampledField zero_field(const TimeGrid& grid) {
    CwSpec off;
    off.amplitude_scale = 0.0;
    return eval_cw(off, grid);
}

DensityState pure_excited_superposition() {
    DensityState s;
    s.m(1, 1) = 0.5;
    s.m(2, 2) = 0.5;
    s.m(1, 2) = 0.5;
    s.m(2, 1) = 0.5;
    return s;
}

SampledField section3_field(const TimeGrid& grid, double amplitude = 1.0) {
    PulseTrainSpec spec;
    spec.tau_p = 10.0;
    spec.centers = {250.0, 750.0};
    spec.amplitude_scale = amplitude;
    return eval_pulse_train(spec, grid);
}

// Resonant two-level reduction: coupling only between g and |1>, level at the
// frame origin. d(rho)/dt = i [rho, H] with H = -Omega (|g><1| + |1><g|).
ScenarioRhs two_level_rhs(double rabi_scale) {
    ScenarioRhs rhs;
    rhs.scenario = SinkTarget::None;
    rhs.params = unitary_params();
    rhs.deriv = [rabi_scale](double, const Matrix4c& rho, Complex field_value) {
        Matrix4c h = Matrix4c::Zero();
        h(0, 1) = -rabi_scale * field_value;
        h(1, 0) = -rabi_scale * std::conj(field_value);
        Matrix4c d = Complex{0.0, 1.0} * (rho * h - h * rho);
        return d;
    };
    return rhs;
}

}  // namespace

TEST_CASE("free precession: rho_12 modulus constant, phase advances at omega_21") {
    const SystemParams p = unitary_params();
    const ScenarioRhs rhs = build_rhs_unitary(p);
    const TimeGrid grid = TimeGrid::span(0.0, 178.0, 0.05);
    const auto record = run_trajectory(rhs, zero_field(grid), pure_excited_superposition());

    for (std::size_t k = 0; k < record.n_samples(); k += 100) {
        CHECK(std::abs(record.rho_12[k]) == doctest::Approx(0.5).epsilon(1e-9));
    }
    // One full excited period (89 fs): phase returns to the start.
    const std::size_t k89 = static_cast<std::size_t>(std::llround(89.0 / 0.05));
    CHECK(record.rho_12[k89].real() == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(record.rho_12[k89].imag() == doctest::Approx(0.0).epsilon(1e-7));
    // Quarter period: rho_12 = 0.5 exp(i pi/2) = 0.5 i.
    const std::size_t k22 = static_cast<std::size_t>(std::llround(22.25 / 0.05));
    CHECK(record.rho_12[k22].real() == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(record.rho_12[k22].imag() == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("field-free decay follows the closed form") {
    const TimeGrid grid = TimeGrid::span(0.0, 100.0, 0.1);
    DensityState initial;
    initial.m(1, 1) = 1.0;

    SUBCASE("trap sink: rho_11 = exp(-gamma t / 2), trap collects") {
        const ScenarioRhs rhs = build_rhs_trap(trap_params(20.0));
        const auto record = run_trajectory(rhs, zero_field(grid), initial);
        for (std::size_t k = 0; k < record.n_samples(); k += 50) {
            const double t = record.grid.time(k);
            const double expected = std::exp(-t / 40.0);
            CHECK(record.rho_11[k] == doctest::Approx(expected).epsilon(1e-10));
            CHECK(record.rho_tt[k] == doctest::Approx(1.0 - expected).epsilon(1e-10));
        }
    }
    SUBCASE("ground sink: population returns to the ground state") {
        SystemParams p = trap_params(20.0);
        p.sink_target = SinkTarget::Ground;
        const ScenarioRhs rhs = build_rhs_ground_relax(p);
        const auto record = run_trajectory(rhs, zero_field(grid), initial);
        const std::size_t last = record.n_samples() - 1;
        CHECK(record.rho_gg[last] ==
              doctest::Approx(1.0 - std::exp(-100.0 / 40.0)).epsilon(1e-10));
        CHECK(record.rho_tt[last] == 0.0);
    }
}

TEST_CASE("builders enforce the scenario") {
    SystemParams p = trap_params(20.0);
    p.sink_target = SinkTarget::Ground;
    CHECK_THROWS_AS(build_rhs_trap(p), WrongScenario);
    p.sink_target = SinkTarget::Trap;
    CHECK_THROWS_AS(build_rhs_ground_relax(p), WrongScenario);
    CHECK_THROWS_AS(build_rhs_unitary(p), WrongScenario);
    p.sink_target = SinkTarget::None;
    CHECK_THROWS_AS(build_rhs_unitary(p), InvalidSpec);  // gamma_t != 0
    p.gamma_t = -1.0;
    p.sink_target = SinkTarget::Trap;
    CHECK_THROWS_AS(build_rhs_trap(p), InvalidSpec);
}

TEST_CASE("zero right-hand side leaves the state bit-identical") {
    ScenarioRhs rhs;
    rhs.params = unitary_params();
    rhs.deriv = [](double, const Matrix4c&, Complex) { return Matrix4c::Zero().eval(); };
    const TimeGrid grid = TimeGrid::span(0.0, 10.0, 0.5);
    const DensityState before = pure_excited_superposition();
    const DensityState after = step_rk4(rhs, before, 0.0, 0.5, zero_field(grid));
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) CHECK(after.m(i, j) == before.m(i, j));
    }
}

TEST_CASE("step_rk4 rejects steps outside the field grid") {
    const ScenarioRhs rhs = build_rhs_unitary(unitary_params());
    const TimeGrid grid = TimeGrid::span(0.0, 10.0, 0.5);
    const SampledField field = zero_field(grid);
    CHECK_THROWS_AS(step_rk4(rhs, new_ground_state(), 9.8, 0.5, field), OutOfGrid);
    CHECK_THROWS_AS(step_rk4(rhs, new_ground_state(), -0.5, 0.5, field), OutOfGrid);
}

TEST_CASE("two-level reduction reproduces the analytic Rabi oscillation") {
    const double rabi = units::angular_from_thz(10.0);  // 0.0628 rad/fs
    const ScenarioRhs rhs = two_level_rhs(rabi);
    CwSpec cw;
    const TimeGrid grid = TimeGrid::span(0.0, 500.0, 0.2);  // 10 population periods
    const auto record = run_trajectory(rhs, eval_cw(cw, grid), new_ground_state());

    double worst = 0.0;
    for (std::size_t k = 0; k < record.n_samples(); ++k) {
        const double t = record.grid.time(k);
        const double expected = std::pow(std::sin(rabi * t), 2);
        worst = std::max(worst, std::abs(record.rho_11[k] - expected));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("RK4 converges at fourth order under step halving") {
    const double rabi = units::angular_from_thz(10.0);

    SUBCASE("two-level resonant drive") {
        const ScenarioRhs rhs = two_level_rhs(rabi);
        CwSpec cw;
        auto final_state = [&](double dt) {
            const TimeGrid grid = TimeGrid::span(0.0, 500.0, dt);
            const auto rec = run_trajectory(rhs, eval_cw(cw, grid), new_ground_state());
            return state_from_record(rec, rec.n_samples() - 1);
        };
        const DensityState a = final_state(1.0);
        const DensityState b = final_state(0.5);
        const DensityState c = final_state(0.25);
        const double e1 = (a.m - b.m).cwiseAbs().maxCoeff();
        const double e2 = (b.m - c.m).cwiseAbs().maxCoeff();
        CHECK(e1 / e2 >= 8.0);
        CHECK(e1 / e2 <= 32.0);
    }
    SUBCASE("V system with pulses and trap") {
        const ScenarioRhs rhs = build_rhs_trap(trap_params(20.0));
        auto final_state = [&](double dt) {
            const TimeGrid grid = TimeGrid::span(0.0, 1000.0, dt);
            const auto rec = run_trajectory(rhs, section3_field(grid), new_ground_state());
            return state_from_record(rec, rec.n_samples() - 1);
        };
        const DensityState a = final_state(0.2);
        const DensityState b = final_state(0.1);
        const DensityState c = final_state(0.05);
        const double e1 = (a.m - b.m).cwiseAbs().maxCoeff();
        const double e2 = (b.m - c.m).cwiseAbs().maxCoeff();
        CHECK(e1 / e2 >= 8.0);
        CHECK(e1 / e2 <= 32.0);
    }
}

TEST_CASE("zero field from the ground state records an undefined measure") {
    const ScenarioRhs rhs = build_rhs_trap(trap_params(20.0));
    const TimeGrid grid = TimeGrid::span(0.0, 50.0, 0.1);
    const auto record = run_trajectory(rhs, zero_field(grid), new_ground_state());
    for (std::size_t k = 0; k < record.n_samples(); ++k) {
        CHECK(record.rho_11[k] == 0.0);
        CHECK(record.rho_22[k] == 0.0);
        CHECK(std::abs(record.rho_12[k]) == 0.0);
        CHECK(std::isnan(record.C[k]));
        CHECK(record.rho_gg[k] == 1.0);
    }
}

TEST_CASE("run_trajectory aborts with step details when invariants break") {
    ScenarioRhs rhs;
    rhs.params = unitary_params();
    // Injects trace growth: d(rho_gg)/dt = 1e-3.
    rhs.deriv = [](double, const Matrix4c&, Complex) {
        Matrix4c d = Matrix4c::Zero();
        d(0, 0) = 1e-3;
        return d;
    };
    const TimeGrid grid = TimeGrid::span(0.0, 10.0, 0.1);
    try {
        run_trajectory(rhs, zero_field(grid), new_ground_state());
        FAIL("expected InvariantViolation");
    } catch (const InvariantViolation& err) {
        CHECK(err.step_index >= 1);
        REQUIRE(!err.violations.empty());
        CHECK(err.violations[0].kind == Violation::Kind::Trace);
    }
}

TEST_CASE("trace is conserved and rho_tt is monotone through the pulse sequence") {
    const ScenarioRhs rhs = build_rhs_trap(trap_params(20.0));
    const TimeGrid grid = TimeGrid::span(0.0, 1000.0, 0.16);
    const auto record = run_trajectory(rhs, section3_field(grid), new_ground_state());
    double prev_tt = -1.0;
    for (std::size_t k = 0; k < record.n_samples(); ++k) {
        const double trace =
            record.rho_gg[k] + record.rho_11[k] + record.rho_22[k] + record.rho_tt[k];
        CHECK(std::abs(trace - 1.0) <= 1e-9);
        CHECK(record.rho_tt[k] >= prev_tt - 1e-12);
        prev_tt = record.rho_tt[k];
    }
}

TEST_CASE("purity is conserved under unitary evolution with drive") {
    const ScenarioRhs rhs = build_rhs_unitary(unitary_params());
    PulseTrainSpec spec;
    spec.tau_p = 10.0;
    spec.centers = {100.0};
    const TimeGrid grid = TimeGrid::span(0.0, 300.0, 0.05);
    const auto record =
        run_trajectory(rhs, eval_pulse_train(spec, grid), new_ground_state());
    for (std::size_t k = 0; k < record.n_samples(); k += 50) {
        CHECK(std::abs(purity_from_record(record, k) - 1.0) <= 1e-8);
    }
}

TEST_CASE("results are invariant under the frame knob") {
    const TimeGrid grid = TimeGrid::span(0.0, 1000.0, 0.16);
    SystemParams p0 = trap_params(20.0);
    SystemParams p1 = p0;
    p1.carrier_detuning = 0.05;

    const auto rec0 = run_trajectory(build_rhs_trap(p0), section3_field(grid), new_ground_state());
    const auto rec1 = run_trajectory(build_rhs_trap(p1), section3_field(grid), new_ground_state());
    double worst = 0.0;
    for (std::size_t k = 0; k < rec0.n_samples(); ++k) {
        worst = std::max(worst, std::abs(rec0.rho_11[k] - rec1.rho_11[k]));
        worst = std::max(worst, std::abs(rec0.rho_22[k] - rec1.rho_22[k]));
        worst = std::max(worst, std::abs(rec0.rho_gg[k] - rec1.rho_gg[k]));
        worst = std::max(worst, std::abs(rec0.rho_tt[k] - rec1.rho_tt[k]));
        worst = std::max(worst,
                         std::abs(std::abs(rec0.rho_12[k]) - std::abs(rec1.rho_12[k])));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("weak-field response: |rho_12| quadratic in the amplitude, C invariant") {
    const ScenarioRhs rhs = build_rhs_trap(trap_params(20.0));
    PulseTrainSpec spec;
    spec.tau_p = 10.0;
    spec.centers = {100.0};

    auto run_amp = [&](double amp) {
        PulseTrainSpec s = spec;
        s.amplitude_scale = amp;
        const TimeGrid grid = TimeGrid::span(0.0, 250.0, 0.1);
        return run_trajectory(rhs, eval_pulse_train(s, grid), new_ground_state());
    };
    const auto lo = run_amp(0.01);
    const auto hi = run_amp(0.02);

    auto peak_abs12 = [](const TrajectoryRecord& r) {
        double peak = 0.0;
        for (const auto& v : r.rho_12) peak = std::max(peak, std::abs(v));
        return peak;
    };
    auto peak_c = [](const TrajectoryRecord& r) {
        double peak = 0.0;
        for (const double c : r.C) {
            if (!std::isnan(c)) peak = std::max(peak, c);
        }
        return peak;
    };
    const double ratio = peak_abs12(hi) / peak_abs12(lo);
    CHECK(ratio > 4.0 * 0.95);
    CHECK(ratio < 4.0 * 1.05);
    CHECK(std::abs(peak_c(hi) / peak_c(lo) - 1.0) < 0.01);
}

TEST_CASE("substep integration agrees with the plain run") {
    const ScenarioRhs rhs = build_rhs_trap(trap_params(20.0));
    const TimeGrid grid = TimeGrid::span(0.0, 1000.0, 0.16);
    const SampledField field = section3_field(grid);
    const auto coarse = run_trajectory(rhs, field, new_ground_state());
    StepOptions fine;
    fine.substeps = 2;
    const auto halved = run_trajectory(rhs, field, new_ground_state(), fine);
    double worst = 0.0;
    for (std::size_t k = 0; k < coarse.n_samples(); ++k) {
        worst = std::max(worst, std::abs(coarse.rho_11[k] - halved.rho_11[k]));
    }
    CHECK(worst <= 1e-8);
    CHECK(worst > 0.0);  // the runs must actually differ
}

TEST_CASE("second pulse re-excites coherence after a strong sink empties the system") {
    const ScenarioRhs rhs = build_rhs_trap(trap_params(20.0));
    const TimeGrid grid = TimeGrid::span(0.0, 1000.0, 0.16);
    const auto record = run_trajectory(rhs, section3_field(grid), new_ground_state());

    const double c_before = window_peak(record, {600.0, 700.0, "settled"}, ResurgenceQuantity::C);
    const double c_after = window_peak(record, {700.0, 1000.0, "pulse2"}, ResurgenceQuantity::C);
    CHECK(c_before < 0.01);
    CHECK(c_after > 0.4);
}

TEST_CASE("the second |rho_12| burst is larger for the weaker sink") {
    const TimeGrid grid = TimeGrid::span(0.0, 1000.0, 0.16);
    auto second_burst_peak = [&](double sink_time) {
        const auto rec = run_trajectory(build_rhs_trap(trap_params(sink_time)),
                                        section3_field(grid), new_ground_state());
        return window_peak(rec, {700.0, 1000.0, "pulse2"}, ResurgenceQuantity::AbsRho12);
    };
    CHECK(second_burst_peak(140.0) > second_burst_peak(20.0));
}

TEST_CASE("cw drive with ground relaxation reaches a nonzero steady coherence") {
    SUBCASE("degenerate excited pair") {
        SystemParams p;
        p.sink_target = SinkTarget::Ground;
        p.omega_21 = 0.0;
        p.gamma_t = 1.0 / 140.0;
        const TimeGrid grid = TimeGrid::span(0.0, 3000.0, 0.1);
        const auto rec = run_trajectory(build_rhs_ground_relax(p), eval_cw({}, grid),
                                        new_ground_state());
        const std::size_t last = rec.n_samples() - 1;
        CHECK(std::abs(rec.rho_12[last]) > 1e-3);
        // settled: negligible drift across the final 10%
        const std::size_t tail = static_cast<std::size_t>(0.9 * static_cast<double>(last));
        CHECK(std::abs(std::abs(rec.rho_12[last]) - std::abs(rec.rho_12[tail])) < 1e-5);
    }
    SUBCASE("steady coherence fraction grows as the splitting shrinks") {
        auto steady_c = [](double tau_c) {
            SystemParams p;
            p.sink_target = SinkTarget::Ground;
            p.omega_21 = units::splitting_from_period(tau_c);
            p.gamma_t = 1.0 / 140.0;
            const TimeGrid grid = TimeGrid::span(0.0, 4000.0, 0.1);
            const auto rec = run_trajectory(build_rhs_ground_relax(p), eval_cw({}, grid),
                                            new_ground_state());
            return rec.C.back();
        };
        const double c_small = steady_c(44.5);
        const double c_mid = steady_c(89.0);
        const double c_large = steady_c(178.0);
        CHECK(c_large > c_mid);
        CHECK(c_mid > c_small);
    }
}
