// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vsim/fields.hpp"
#include "vsim/state.hpp"

namespace vsim {

// Right-hand side of the equations of motion in the rotating frame. The
// callable maps (t, rho, sampled field value) to d(rho)/dt as a Hermitian
// matrix. Tests may construct custom instances; the builders below produce
// the scenario dynamics.
//
// Frame convention: the frame rotates at (level midpoint + carrier_detuning).
// Excited levels sit at -/+ omega_21/2 - carrier_detuning, the ground and
// trap levels at 0, and the sampled field (tabulated in the midpoint frame)
// picks up the compensating phase exp(+i*carrier_detuning*t) inside the RHS.
// Populations and rho_12 are therefore invariant under carrier_detuning.
struct ScenarioRhs {
    using Fn = std::function<Matrix4c(double t, const Matrix4c& rho, Complex field_value)>;

    Fn deriv;
    SinkTarget scenario = SinkTarget::None;
    SystemParams params;
};

// Sink drains both excited populations at gamma_t/2 into the trap level.
ScenarioRhs build_rhs_trap(const SystemParams& params);

// Sink returns excited population to the ground state; trap level inert.
ScenarioRhs build_rhs_ground_relax(const SystemParams& params);

// No sink; requires gamma_t == 0 and reduces to unitary dynamics.
ScenarioRhs build_rhs_unitary(const SystemParams& params);

// Dispatch on params.sink_target.
ScenarioRhs build_rhs(const SystemParams& params);

// Populations are recorded as real series, coherences as complex series, plus
// the derived coherence fraction C (NaN marks the undefined sentinel where
// rho_11 + rho_22 falls below the population floor).
struct TrajectoryRecord {
    TimeGrid grid;
    std::vector<double> rho_gg, rho_11, rho_22, rho_tt;
    std::vector<Complex> rho_12, rho_1g, rho_2g;
    std::vector<double> C;
    SystemParams params;
    std::string field_spec_digest;

    std::size_t n_samples() const { return grid.n_samples(); }
};

// Reconstruct the full density matrix stored at sample k (trap coherences are
// zero for every state this library evolves).
DensityState state_from_record(const TrajectoryRecord& record, std::size_t k);

struct StepOptions {
    int substeps = 1;                 // integrate at dt/substeps, record at dt
    ValidityTolerances tolerances{};
};

// One classical RK4 update over [t, t+dt]; field values at half steps come
// from the exact evaluator when present, otherwise from cubic interpolation.
// Output is re-Hermitized.
DensityState step_rk4(const ScenarioRhs& rhs, const DensityState& state, double t, double dt,
                      const SampledField& field);

// Integrate over the full grid, validating invariants at every integrator step
// and recording every grid sample. Throws InvariantViolation on a defect.
TrajectoryRecord run_trajectory(const ScenarioRhs& rhs, const SampledField& field,
                                const DensityState& initial, const StepOptions& options = {},
                                const std::string& field_spec_digest = {});

}  // namespace vsim
