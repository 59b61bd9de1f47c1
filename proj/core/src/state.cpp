// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#include "vsim/state.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <limits>

namespace vsim {

std::string Violation::describe() const {
    char buf[96];
    const char* name = "Violation";
    switch (kind) {
        case Kind::Trace: name = "TraceViolation"; break;
        case Kind::Hermiticity: name = "HermiticityViolation"; break;
        case Kind::Positivity: name = "PositivityViolation"; break;
        case Kind::Population: name = "PopulationViolation"; break;
    }
    std::snprintf(buf, sizeof buf, "%s(%.6g)", name, magnitude);
    return buf;
}

DensityState new_ground_state() {
    DensityState s;
    s.m(kGroundIdx, kGroundIdx) = 1.0;
    return s;
}

double DensityState::smallest_eigenvalue() const {
    const Matrix4c h = 0.5 * (m + m.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Matrix4c> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

namespace {

// Cheap positivity certificate: rho + tol*I admits a Cholesky factorization
// iff its smallest eigenvalue is >= 0. Falls back to the eigensolver only to
// report the actual magnitude of a violation.
bool positivity_certified(const Matrix4c& hermitian_part, double tol) {
    Matrix4c shifted = hermitian_part;
    shifted.diagonal().array() += tol;
    Eigen::LLT<Matrix4c> llt(shifted);
    return llt.info() == Eigen::Success;
}

}  // namespace

std::vector<Violation> validate(const DensityState& state, const ValidityTolerances& tol) noexcept {
    std::vector<Violation> out;

    const double defect = state.hermiticity_defect();
    if (!(defect <= tol.hermiticity)) {
        out.push_back({Violation::Kind::Hermiticity, defect});
    }

    const double trace_err = std::abs(state.trace() - Complex{1.0, 0.0});
    if (!(trace_err <= tol.trace)) {
        out.push_back({Violation::Kind::Trace, trace_err});
    }

    double worst_pop = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double p = state.m(i, i).real();
        const double excess = std::max(-tol.population - p, p - (1.0 + tol.population));
        if (excess > worst_pop) worst_pop = excess;
        if (std::isnan(p)) worst_pop = std::numeric_limits<double>::quiet_NaN();
    }
    if (!(worst_pop <= 0.0)) {
        out.push_back({Violation::Kind::Population, worst_pop});
    }

    const Matrix4c h = 0.5 * (state.m + state.m.adjoint().eval());
    if (h.hasNaN()) {
        out.push_back({Violation::Kind::Positivity, std::numeric_limits<double>::quiet_NaN()});
    } else if (!positivity_certified(h, tol.positivity)) {
        Eigen::SelfAdjointEigenSolver<Matrix4c> solver(h, Eigen::EigenvaluesOnly);
        const double min_eig = solver.eigenvalues().minCoeff();
        if (!(min_eig >= -tol.positivity)) {
            out.push_back({Violation::Kind::Positivity, min_eig});
        }
    }

    return out;
}

namespace {

std::string violation_message(std::size_t step, const std::vector<Violation>& violations,
                              std::optional<std::uint64_t> seed) {
    std::string msg = "state invariants violated at step " + std::to_string(step);
    if (seed) msg += " (realization seed " + std::to_string(*seed) + ")";
    msg += ":";
    for (const auto& v : violations) {
        msg += " ";
        msg += v.describe();
    }
    return msg;
}

}  // namespace

InvariantViolation::InvariantViolation(std::size_t step, std::vector<Violation> v,
                                       std::optional<std::uint64_t> realization_seed)
    : SimError(violation_message(step, v, realization_seed)),
      step_index(step),
      violations(std::move(v)),
      seed(realization_seed) {}

}  // namespace vsim
