// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "vsim/fields.hpp"
#include "vsim/rng.hpp"

using namespace vsim;

namespace {

TimeGrid default_pulse_grid() { return TimeGrid::span(0.0, 1000.0, 0.2); }

PulseTrainSpec default_pulse_spec() {
    PulseTrainSpec spec;
    spec.tau_p = 10.0;
    spec.centers = {250.0, 750.0};
    return spec;
}

}  // namespace

TEST_CASE("pulse train values at the pulse centers and midpoint") {
    const auto field = eval_pulse_train(default_pulse_spec(), default_pulse_grid());
    REQUIRE(field.values.size() == 5001);

    // t = 250 fs lies on the grid; the cross term exp(-2500) underflows.
    const std::size_t k250 = 1250;
    CHECK(field.values[k250].real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(field.values[k250].imag() == 0.0);

    // Midpoint between the pulses: 2 exp(-625), zero to double precision.
    const std::size_t k500 = 2500;
    CHECK(std::abs(field.values[k500]) < 1e-250);
}

TEST_CASE("pulse train half-maximum points") {
    const auto field = eval_pulse_train(default_pulse_spec(), default_pulse_grid());
    // Envelope half maximum at t1 + tau_p sqrt(ln 2).
    const double t_half = 250.0 + 10.0 * std::sqrt(std::log(2.0));
    CHECK(field.value_at(t_half).real() == doctest::Approx(0.5).epsilon(1e-12));
    // Squared-envelope half maximum at t1 + tau_p sqrt(ln 2 / 2): 1/sqrt(2).
    const double t_half_sq = 250.0 + 10.0 * std::sqrt(0.5 * std::log(2.0));
    CHECK(field.value_at(t_half_sq).real() ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    // Full width at half maximum of the envelope is 2 sqrt(ln 2) tau_p ~ 16.65 fs.
    const double fwhm = 2.0 * std::sqrt(std::log(2.0)) * 10.0;
    CHECK(field.value_at(250.0 - 0.5 * fwhm).real() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("pulse train grid preconditions") {
    CHECK_THROWS_AS(eval_pulse_train(default_pulse_spec(), TimeGrid::span(0.0, 1000.0, 0.3)),
                    GridTooCoarse);
    CHECK_THROWS_AS(eval_pulse_train(default_pulse_spec(), TimeGrid::span(210.0, 1000.0, 0.2)),
                    GridTooShort);
    CHECK_THROWS_AS(eval_pulse_train(default_pulse_spec(), TimeGrid::span(0.0, 780.0, 0.2)),
                    GridTooShort);
    PulseTrainSpec bad = default_pulse_spec();
    bad.tau_p = -5.0;
    CHECK_THROWS_AS(eval_pulse_train(bad, default_pulse_grid()), InvalidSpec);
    bad = default_pulse_spec();
    bad.centers = {750.0, 250.0};
    CHECK_THROWS_AS(eval_pulse_train(bad, default_pulse_grid()), InvalidSpec);
}

TEST_CASE("pulse train output is real, non-negative, and peaks at the amplitude") {
    rng::Xoshiro256pp gen(2026);
    for (int trial = 0; trial < 50; ++trial) {
        PulseTrainSpec spec;
        spec.tau_p = 5.0 + 15.0 * gen.uniform_unit();
        spec.amplitude_scale = 0.25 + 2.0 * gen.uniform_unit();
        const double dt = spec.tau_p / 50.0 * 0.9;
        // Centers on grid points, separated well beyond overlap.
        const double c1 = std::ceil(6.0 * spec.tau_p / dt) * dt;
        const double c2 = c1 + std::ceil(15.0 * spec.tau_p / dt) * dt;
        spec.centers = {c1, c2};
        const auto grid = TimeGrid::span(0.0, c2 + 6.0 * spec.tau_p, dt);
        const auto field = eval_pulse_train(spec, grid);

        double peak = 0.0;
        for (const auto& v : field.values) {
            CHECK(v.imag() == 0.0);
            CHECK(v.real() >= 0.0);
            peak = std::max(peak, v.real());
        }
        CAPTURE(trial);
        CHECK(std::abs(peak - spec.amplitude_scale) < 1e-12 * spec.amplitude_scale);
    }
}

TEST_CASE("cw field") {
    const TimeGrid grid = TimeGrid::span(0.0, 100.0, 0.5);
    CwSpec spec;
    spec.amplitude_scale = 0.7;

    SUBCASE("zero detuning is a real constant") {
        const auto field = eval_cw(spec, grid);
        for (const auto& v : field.values) CHECK(v == Complex{0.7, 0.0});
        CHECK(field.value_at(33.3) == Complex{0.7, 0.0});
    }
    SUBCASE("detuning rotates the phase") {
        spec.detuning_from_midpoint = 0.25;
        const auto field = eval_cw(spec, grid);
        const double t_half_turn = std::numbers::pi / 0.25;
        const Complex v = field.value_at(t_half_turn);
        CHECK(v.real() == doctest::Approx(-0.7).epsilon(1e-12));
        CHECK(std::abs(v.imag()) < 1e-12);
        for (const auto& sample : field.values) {
            CHECK(std::abs(sample) == doctest::Approx(0.7).epsilon(1e-12));
        }
    }
}

TEST_CASE("noisy pulse synthesis is deterministic in (spec, grid, seed)") {
    NoisyPulseSpec spec;
    spec.tau_p = 20.0;
    spec.tau_d = 4.0;
    spec.centers = {60.0, 160.0};
    const TimeGrid grid = TimeGrid::span(-40.0, 260.0, 0.2);

    const auto a = synthesize_noisy_pulse(spec, grid, 42);
    const auto b = synthesize_noisy_pulse(spec, grid, 42);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t k = 0; k < a.values.size(); ++k) CHECK(a.values[k] == b.values[k]);
    CHECK(a.seed == 42);

    const NoiseModel model(spec, grid);
    const auto c = model.realization(42);
    for (std::size_t k = 0; k < a.values.size(); ++k) CHECK(a.values[k] == c.values[k]);

    const auto d = synthesize_noisy_pulse(spec, grid, 43);
    bool any_different = false;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        if (a.values[k] != d.values[k]) any_different = true;
    }
    CHECK(any_different);
}

TEST_CASE("noisy pulse spec preconditions") {
    NoisyPulseSpec spec;
    spec.tau_p = 20.0;
    spec.tau_d = 4.0;
    spec.centers = {60.0, 160.0};
    CHECK_THROWS_AS(synthesize_noisy_pulse(spec, TimeGrid::span(-40.0, 260.0, 0.3), 1),
                    GridTooCoarse);  // dt > tau_d/20
    NoisyPulseSpec bad = spec;
    bad.tau_d = 0.0;
    CHECK_THROWS_AS(synthesize_noisy_pulse(bad, TimeGrid::span(-40.0, 260.0, 0.2), 1),
                    InvalidSpec);
    bad = spec;
    bad.tau_p = -1.0;
    CHECK_THROWS_AS(synthesize_noisy_pulse(bad, TimeGrid::span(-40.0, 260.0, 0.2), 1),
                    InvalidSpec);
}

TEST_CASE("fully correlated limit collapses to one Gaussian per realization") {
    NoisyPulseSpec spec;
    spec.tau_p = 100.0;
    spec.tau_d = 1e6;
    spec.centers = {25.0};
    const TimeGrid grid = TimeGrid::span(0.0, 50.0, 0.5);
    const NoiseModel model(spec, grid);
    const auto field = model.realization(7);
    // |eps(t)| / |eps(t')| must match the deterministic envelope ratio.
    const auto& env = model.envelope();
    for (std::size_t k = 0; k < field.values.size(); k += 7) {
        const double ratio = std::abs(field.values[k]) / std::abs(field.values[50]);
        CHECK(ratio == doctest::Approx(env[k] / env[50]).epsilon(1e-3));
    }
}

TEST_CASE("stationary noise has unit variance and the Gaussian kernel") {
    const TimeGrid grid = TimeGrid::span(0.0, 50.0, 0.5);
    const double tau_d = 10.0;
    const std::size_t n_seeds = 10000;

    // Collect realizations once; probe |xi|^2 and one lag near the kernel
    // half-width (snapped to the grid).
    const std::size_t lag_steps = 24;  // 12 fs
    const double lag = 12.0;
    const double kernel = std::exp(-lag * lag / (2.0 * tau_d * tau_d));

    double sum_sq[3] = {0.0, 0.0, 0.0};
    const std::size_t probes[3] = {0, 50, 100};
    Complex sum_lag{0.0, 0.0};
    double sum_lag_re2 = 0.0, sum_lag_im2 = 0.0;
    for (std::size_t s = 0; s < n_seeds; ++s) {
        const auto xi = synthesize_stationary_noise(grid, tau_d, rng::split_seed(999, s));
        for (int p = 0; p < 3; ++p) sum_sq[p] += std::norm(xi[probes[p]]);
        const Complex prod = xi[10] * std::conj(xi[10 + lag_steps]);
        sum_lag += prod;
        sum_lag_re2 += prod.real() * prod.real();
        sum_lag_im2 += prod.imag() * prod.imag();
    }

    const double n = static_cast<double>(n_seeds);
    for (int p = 0; p < 3; ++p) {
        const double mean = sum_sq[p] / n;
        // |xi|^2 is exponential with unit mean; se = 1/sqrt(n).
        CHECK(std::abs(mean - 1.0) < 3.0 / std::sqrt(n));
    }

    const Complex mean_lag = sum_lag / n;
    const double var_re = (sum_lag_re2 - n * mean_lag.real() * mean_lag.real()) / (n - 1.0);
    const double var_im = (sum_lag_im2 - n * mean_lag.imag() * mean_lag.imag()) / (n - 1.0);
    const double se = std::sqrt((var_re + var_im) / n);
    CHECK(std::abs(mean_lag - Complex{kernel, 0.0}) < 3.0 * se);
}

TEST_CASE("correlation estimator on constant fields") {
    const TimeGrid grid = TimeGrid::span(0.0, 2.0, 1.0);
    SampledField constant;
    constant.grid = grid;
    constant.values = {Complex{2.0, 1.0}, Complex{2.0, 1.0}, Complex{2.0, 1.0}};
    const std::vector<SampledField> fields = {constant, constant, constant};
    const auto est = estimate_two_time_correlation(fields, {{0, 2}, {1, 1}});
    REQUIRE(est.size() == 2);
    CHECK(est[0].mean == Complex{5.0, 0.0});
    CHECK(est[0].std_error == 0.0);
    CHECK(est[1].mean == Complex{5.0, 0.0});
}

TEST_CASE("correlation estimator input validation") {
    const TimeGrid grid = TimeGrid::span(0.0, 2.0, 1.0);
    SampledField f1;
    f1.grid = grid;
    f1.values = {Complex{1, 0}, Complex{1, 0}, Complex{1, 0}};
    CHECK_THROWS_AS(estimate_two_time_correlation({f1}, {{0, 0}}), EmptyEnsemble);

    SampledField f2 = f1;
    f2.grid = TimeGrid::span(0.0, 4.0, 2.0);
    CHECK_THROWS_AS(estimate_two_time_correlation({f1, f2}, {{0, 0}}), GridMismatch);
    CHECK_THROWS_AS(estimate_two_time_correlation({f1, f1}, {{0, 9}}), OutOfGrid);
}

TEST_CASE("synthesized ensemble reproduces the two-time correlation model") {
    NoisyPulseSpec spec;
    spec.tau_p = 20.0;
    spec.tau_d = 4.0;
    spec.centers = {60.0, 160.0};
    spec.amplitude_scale = 1.3;
    const TimeGrid grid = TimeGrid::span(-40.0, 260.0, 0.2);
    const NoiseModel model(spec, grid);

    const auto snap = [&grid](double t) {
        return static_cast<std::size_t>(std::llround((t - grid.t_start) / grid.dt));
    };
    std::vector<IndexPair> pairs;
    // Diagonal, intra-pulse lags, and a widely separated pair (>= 10 tau_d).
    pairs.push_back({snap(60.0), snap(60.0)});
    pairs.push_back({snap(70.0), snap(70.0)});
    pairs.push_back({snap(160.0), snap(160.0)});
    pairs.push_back({snap(60.0), snap(64.0)});
    pairs.push_back({snap(60.0), snap(68.0)});
    pairs.push_back({snap(160.0), snap(166.0)});
    const std::size_t far_a = snap(60.0), far_b = snap(110.0);
    pairs.push_back({far_a, far_b});

    const std::size_t n = 4000;
    const auto est = estimate_two_time_correlation(
        [&model](std::size_t i) { return model.realization(rng::split_seed(31337, i)); }, n,
        pairs, 1);

    for (std::size_t p = 0; p + 1 < pairs.size(); ++p) {
        const Complex expected = model.expected_correlation(pairs[p].first, pairs[p].second);
        CAPTURE(p);
        CHECK(std::abs(est[p].mean - expected) <= 3.0 * est[p].std_error);
    }
    // Separation 50 fs = 12.5 tau_d: modulus indistinguishable from zero.
    CHECK(std::abs(est.back().mean) <= 3.0 * est.back().std_error + 1e-12);
}

TEST_CASE("correlation estimator is reduction-order independent") {
    NoisyPulseSpec spec;
    spec.tau_p = 20.0;
    spec.tau_d = 4.0;
    spec.centers = {60.0};
    const TimeGrid grid = TimeGrid::span(-40.0, 160.0, 0.2);
    const NoiseModel model(spec, grid);
    const std::vector<IndexPair> pairs = {{500, 500}, {500, 520}};
    const auto make = [&model](std::size_t i) {
        return model.realization(rng::split_seed(5, i));
    };
    const auto a = estimate_two_time_correlation(make, 300, pairs, 1);
    const auto b = estimate_two_time_correlation(make, 300, pairs, 3);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        CHECK(a[p].mean == b[p].mean);
        CHECK(a[p].std_error == b[p].std_error);
    }
}

TEST_CASE("independent per-pulse noise decorrelates the two pulses") {
    NoisyPulseSpec spec;
    spec.tau_p = 20.0;
    spec.tau_d = 100.0;  // long memory: shared noise would correlate the pulses
    spec.centers = {60.0, 160.0};
    const TimeGrid grid = TimeGrid::span(-40.0, 260.0, 0.2);

    NoisyPulseSpec shared = spec;
    shared.coupling = NoiseCoupling::Shared;
    NoisyPulseSpec indep = spec;
    indep.coupling = NoiseCoupling::IndependentPerPulse;

    const NoiseModel shared_model(shared, grid);
    const NoiseModel indep_model(indep, grid);
    const auto snap = [&grid](double t) {
        return static_cast<std::size_t>(std::llround((t - grid.t_start) / grid.dt));
    };
    const std::vector<IndexPair> cross = {{snap(60.0), snap(160.0)}};

    const std::size_t n = 3000;
    const auto shared_est = estimate_two_time_correlation(
        [&shared_model](std::size_t i) { return shared_model.realization(rng::split_seed(8, i)); },
        n, cross, 1);
    const auto indep_est = estimate_two_time_correlation(
        [&indep_model](std::size_t i) { return indep_model.realization(rng::split_seed(8, i)); },
        n, cross, 1);

    const Complex shared_expect = shared_model.expected_correlation(cross[0].first, cross[0].second);
    CHECK(std::abs(shared_expect) > 0.3);  // strongly correlated by construction
    CHECK(std::abs(shared_est[0].mean - shared_expect) <= 3.0 * shared_est[0].std_error);
    CHECK(std::abs(indep_est[0].mean) <= 3.0 * indep_est[0].std_error + 1e-12);
}
