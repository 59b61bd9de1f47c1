// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#include "vsim/dynamics.hpp"

#include <cmath>
#include <limits>

#include "vsim/observables.hpp"

namespace vsim {

namespace {

constexpr Complex kI{0.0, 1.0};

// Scenario equations of motion in the rotating frame. Only the (g,1,2) block
// and the trap population have sources; coherences to the trap level stay at
// whatever they are (zero for every state reachable from the ground state).
Matrix4c scenario_derivative(const SystemParams& p, bool trap_inflow, bool ground_inflow,
                             double t, const Matrix4c& rho, Complex field_value) {
    Complex omega = p.rabi_scale * field_value;
    if (p.carrier_detuning != 0.0) {
        omega *= std::polar(1.0, p.carrier_detuning * t);
    }
    const double delta1 = -0.5 * p.omega_21 - p.carrier_detuning;
    const double delta2 = +0.5 * p.omega_21 - p.carrier_detuning;
    const double gamma = p.gamma_t;
    const double gamma_ig = p.ig_damping == IgDamping::GammaHalf ? 0.5 * gamma : 0.25 * gamma;

    const Complex rho_gg = rho(0, 0);
    const Complex rho_11 = rho(1, 1);
    const Complex rho_22 = rho(2, 2);
    const Complex rho_1g = rho(1, 0);
    const Complex rho_2g = rho(2, 0);
    const Complex rho_12 = rho(1, 2);
    const Complex omega_c = std::conj(omega);

    const Complex pump_1 = kI * (omega_c * std::conj(rho_1g) - omega * rho_1g);
    const Complex pump_2 = kI * (omega_c * std::conj(rho_2g) - omega * rho_2g);

    Matrix4c d = Matrix4c::Zero();
    d(0, 0) = -pump_1 - pump_2;
    d(1, 1) = pump_1 - 0.5 * gamma * rho_11;
    d(2, 2) = pump_2 - 0.5 * gamma * rho_22;
    if (trap_inflow) d(3, 3) = 0.5 * gamma * (rho_11 + rho_22);
    if (ground_inflow) d(0, 0) += 0.5 * gamma * (rho_11 + rho_22);

    d(1, 2) = kI * (p.omega_21 * rho_12 + omega_c * std::conj(rho_2g) - omega * rho_1g) -
              gamma * rho_12;
    d(1, 0) = -kI * delta1 * rho_1g + kI * omega_c * (rho_gg - rho_11 - rho_12) -
              gamma_ig * rho_1g;
    d(2, 0) = -kI * delta2 * rho_2g + kI * omega_c * (rho_gg - rho_22 - std::conj(rho_12)) -
              gamma_ig * rho_2g;

    d(2, 1) = std::conj(d(1, 2));
    d(0, 1) = std::conj(d(1, 0));
    d(0, 2) = std::conj(d(2, 0));
    return d;
}

ScenarioRhs make_rhs(const SystemParams& params, bool trap_inflow, bool ground_inflow) {
    ScenarioRhs rhs;
    rhs.scenario = params.sink_target;
    rhs.params = params;
    rhs.deriv = [params, trap_inflow, ground_inflow](double t, const Matrix4c& rho,
                                                     Complex field_value) {
        return scenario_derivative(params, trap_inflow, ground_inflow, t, rho, field_value);
    };
    return rhs;
}

void check_params(const SystemParams& p) {
    if (!(p.omega_21 >= 0.0)) throw InvalidSpec("omega_21 must be >= 0");
    if (!(p.gamma_t >= 0.0)) throw InvalidSpec("gamma_t must be >= 0");
    if (!(p.rabi_scale >= 0.0)) throw InvalidSpec("rabi_scale must be >= 0");
}

Matrix4c rk4_raw(const ScenarioRhs& rhs, const Matrix4c& y, double t, double dt,
                 Complex f0, Complex fh, Complex f1) {
    const Matrix4c k1 = rhs.deriv(t, y, f0);
    const Matrix4c k2 = rhs.deriv(t + 0.5 * dt, y + (0.5 * dt) * k1, fh);
    const Matrix4c k3 = rhs.deriv(t + 0.5 * dt, y + (0.5 * dt) * k2, fh);
    const Matrix4c k4 = rhs.deriv(t + dt, y + dt * k3, f1);
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

ScenarioRhs build_rhs_trap(const SystemParams& params) {
    if (params.sink_target != SinkTarget::Trap)
        throw WrongScenario("build_rhs_trap requires sink_target = Trap");
    check_params(params);
    return make_rhs(params, /*trap_inflow=*/true, /*ground_inflow=*/false);
}

ScenarioRhs build_rhs_ground_relax(const SystemParams& params) {
    if (params.sink_target != SinkTarget::Ground)
        throw WrongScenario("build_rhs_ground_relax requires sink_target = Ground");
    check_params(params);
    return make_rhs(params, /*trap_inflow=*/false, /*ground_inflow=*/true);
}

ScenarioRhs build_rhs_unitary(const SystemParams& params) {
    if (params.sink_target != SinkTarget::None)
        throw WrongScenario("build_rhs_unitary requires sink_target = None");
    if (params.gamma_t != 0.0)
        throw InvalidSpec("sink_target = None requires gamma_t = 0");
    check_params(params);
    return make_rhs(params, /*trap_inflow=*/false, /*ground_inflow=*/false);
}

ScenarioRhs build_rhs(const SystemParams& params) {
    switch (params.sink_target) {
        case SinkTarget::Trap: return build_rhs_trap(params);
        case SinkTarget::Ground: return build_rhs_ground_relax(params);
        case SinkTarget::None: return build_rhs_unitary(params);
    }
    throw InvalidSpec("unknown sink target");
}

DensityState state_from_record(const TrajectoryRecord& record, std::size_t k) {
    DensityState s;
    s.m(0, 0) = record.rho_gg[k];
    s.m(1, 1) = record.rho_11[k];
    s.m(2, 2) = record.rho_22[k];
    s.m(3, 3) = record.rho_tt[k];
    s.m(1, 2) = record.rho_12[k];
    s.m(2, 1) = std::conj(record.rho_12[k]);
    s.m(1, 0) = record.rho_1g[k];
    s.m(0, 1) = std::conj(record.rho_1g[k]);
    s.m(2, 0) = record.rho_2g[k];
    s.m(0, 2) = std::conj(record.rho_2g[k]);
    return s;
}

DensityState step_rk4(const ScenarioRhs& rhs, const DensityState& state, double t, double dt,
                      const SampledField& field) {
    if (!field.grid.contains(t) || !field.grid.contains(t + dt)) {
        throw OutOfGrid("step_rk4: step leaves the field grid");
    }
    const Complex f0 = field.value_at(t);
    const Complex fh = field.value_at(t + 0.5 * dt);
    const Complex f1 = field.value_at(t + dt);
    DensityState out;
    out.m = rk4_raw(rhs, state.m, t, dt, f0, fh, f1);
    return out.hermitized();
}

TrajectoryRecord run_trajectory(const ScenarioRhs& rhs, const SampledField& field,
                                const DensityState& initial, const StepOptions& options,
                                const std::string& field_spec_digest) {
    if (options.substeps < 1) throw InvalidSpec("run_trajectory: substeps must be >= 1");
    const TimeGrid& grid = field.grid;

    TrajectoryRecord rec;
    rec.grid = grid;
    rec.params = rhs.params;
    rec.field_spec_digest = field_spec_digest;
    const std::size_t n = grid.n_samples();
    rec.rho_gg.reserve(n);
    rec.rho_11.reserve(n);
    rec.rho_22.reserve(n);
    rec.rho_tt.reserve(n);
    rec.rho_12.reserve(n);
    rec.rho_1g.reserve(n);
    rec.rho_2g.reserve(n);
    rec.C.reserve(n);

    auto record_sample = [&rec](const DensityState& s) {
        rec.rho_gg.push_back(s.rho_gg());
        rec.rho_11.push_back(s.rho_11());
        rec.rho_22.push_back(s.rho_22());
        rec.rho_tt.push_back(s.rho_tt());
        rec.rho_12.push_back(s.rho_12());
        rec.rho_1g.push_back(s.rho_1g());
        rec.rho_2g.push_back(s.rho_2g());
        const auto c = coherence_fraction(s.rho_11(), s.rho_22(), s.rho_12());
        rec.C.push_back(c ? *c : std::numeric_limits<double>::quiet_NaN());
    };

    {
        const auto violations = validate(initial, options.tolerances);
        if (!violations.empty()) throw InvariantViolation(0, violations, field.seed);
    }

    DensityState state = initial;
    record_sample(state);

    const double h = grid.dt / static_cast<double>(options.substeps);
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
        const double t_k = grid.time(k);
        for (int j = 0; j < options.substeps; ++j) {
            const double t = t_k + static_cast<double>(j) * h;
            const Complex f0 = field.value_at(t);
            const Complex fh = field.value_at(t + 0.5 * h);
            const Complex f1 = field.value_at(t + h);
            DensityState raw;
            raw.m = rk4_raw(rhs, state.m, t, h, f0, fh, f1);
            // Validate before re-Hermitizing so symmetrization cannot mask a
            // growing Hermiticity defect.
            const auto violations = validate(raw, options.tolerances);
            if (!violations.empty()) throw InvariantViolation(k + 1, violations, field.seed);
            state = raw.hermitized();
        }
        record_sample(state);
    }
    return rec;
}

}  // namespace vsim
