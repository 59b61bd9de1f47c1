// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vsim/errors.hpp"
#include "vsim/units.hpp"

namespace vsim {

using Complex = std::complex<double>;
using Matrix4c = Eigen::Matrix4cd;

// Fixed basis ordering for the 4x4 density matrix. The trap row/column is
// identically zero in scenarios without a trap, so one state type serves all.
inline constexpr int kGroundIdx = 0;
inline constexpr int kExcited1Idx = 1;
inline constexpr int kExcited2Idx = 2;
inline constexpr int kTrapIdx = 3;

enum class SinkTarget { Trap, Ground, None };

// Damping applied to the ground-excited coherences rho_1g, rho_2g.
// The excited-excited coherence always damps at gamma_t and populations at
// gamma_t/2; each excited index contributes gamma_t/2 and the ground index
// nothing (GammaHalf). GammaQuarter is kept for sensitivity studies.
enum class IgDamping { GammaHalf, GammaQuarter };

struct SystemParams {
    double omega_21 = units::splitting_from_period(89.0);  // rad/fs, E2-E1 splitting
    double rabi_scale = units::angular_from_thz(10.0);     // rad/fs, mu*eps0/hbar
    double gamma_t = units::rate_from_time(20.0);          // 1/fs, sink rate
    SinkTarget sink_target = SinkTarget::Trap;
    double carrier_detuning = 0.0;                         // rad/fs, frame offset from level midpoint
    IgDamping ig_damping = IgDamping::GammaHalf;

    double excited_period() const { return units::period_from_splitting(omega_21); }
    double sink_time() const { return 1.0 / gamma_t; }

    bool operator==(const SystemParams&) const = default;
};

// Uniform time grid: t_k = t_start + k*dt for k in [0, n_steps].
struct TimeGrid {
    double t_start = 0.0;
    double dt = 0.1;
    std::size_t n_steps = 0;

    double t_end() const { return t_start + static_cast<double>(n_steps) * dt; }
    double time(std::size_t k) const { return t_start + static_cast<double>(k) * dt; }
    std::size_t n_samples() const { return n_steps + 1; }

    bool contains(double t) const {
        const double slack = 1e-9 * dt;
        return t >= t_start - slack && t <= t_end() + slack;
    }

    // Smallest uniform grid with the given spacing covering [t_start, t_end_min].
    static TimeGrid span(double t_start, double t_end_min, double dt) {
        if (!(dt > 0.0)) throw InvalidSpec("TimeGrid: dt must be positive");
        if (!(t_end_min > t_start)) throw InvalidSpec("TimeGrid: empty time span");
        const double raw = (t_end_min - t_start) / dt;
        auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9));
        if (n == 0) n = 1;
        return TimeGrid{t_start, dt, n};
    }

    bool operator==(const TimeGrid&) const = default;
};

struct ValidityTolerances {
    double trace = 1e-9;
    double hermiticity = 1e-10;
    double positivity = 1e-8;   // smallest eigenvalue >= -positivity
    double population = 1e-8;   // diagonal entries in [-population, 1+population]
};

struct Violation {
    enum class Kind { Trace, Hermiticity, Positivity, Population };
    Kind kind;
    double magnitude;

    std::string describe() const;
};

// 4x4 density matrix over (g, 1, 2, trap). Plain value type; immutable use
// after construction is the intended pattern.
struct DensityState {
    Matrix4c m = Matrix4c::Zero();

    double rho_gg() const { return m(kGroundIdx, kGroundIdx).real(); }
    double rho_11() const { return m(kExcited1Idx, kExcited1Idx).real(); }
    double rho_22() const { return m(kExcited2Idx, kExcited2Idx).real(); }
    double rho_tt() const { return m(kTrapIdx, kTrapIdx).real(); }
    Complex rho_12() const { return m(kExcited1Idx, kExcited2Idx); }
    Complex rho_1g() const { return m(kExcited1Idx, kGroundIdx); }
    Complex rho_2g() const { return m(kExcited2Idx, kGroundIdx); }

    Complex trace() const { return m.trace(); }

    // max_ij |m_ij - conj(m_ji)|
    double hermiticity_defect() const {
        return (m - m.adjoint().eval()).cwiseAbs().maxCoeff();
    }

    DensityState hermitized() const {
        DensityState out;
        out.m = 0.5 * (m + m.adjoint().eval());
        return out;
    }

    double smallest_eigenvalue() const;
};

DensityState new_ground_state();

// Reports every invariant violation at the given tolerances; empty means valid.
// Never throws.
std::vector<Violation> validate(const DensityState& state,
                                const ValidityTolerances& tol = {}) noexcept;

// Thrown by trajectory integration when validate() finds a defect.
struct InvariantViolation : SimError {
    std::size_t step_index;
    std::vector<Violation> violations;
    std::optional<std::uint64_t> seed;

    InvariantViolation(std::size_t step, std::vector<Violation> v,
                       std::optional<std::uint64_t> realization_seed = std::nullopt);
};

}  // namespace vsim
