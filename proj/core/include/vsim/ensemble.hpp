// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vsim/dynamics.hpp"
#include "vsim/fields.hpp"

namespace vsim {

struct EnsembleSpec {
    std::size_t n_realizations = 2000;
    std::uint64_t base_seed = 12345;
    double convergence_target = 0.02;   // relative stderr on max |<rho_12>|
    bool per_realization_measure = false;  // also record <C_k(t)> for comparison

    bool operator==(const EnsembleSpec&) const = default;
};

// Entrywise means over realizations; C in mean_record is the measure applied
// to the averaged matrix, |<rho_12>|/(<rho_11>+<rho_22>). The non-normative
// average-of-measures variant is populated only on request.
struct EnsembleResult {
    TrajectoryRecord mean_record;
    std::vector<double> stderr_re_rho12;
    std::vector<double> stderr_im_rho12;
    std::vector<double> stderr_rho12;   // sqrt(se_re^2 + se_im^2)
    std::optional<std::vector<double>> mean_C_of_realizations;
    std::size_t n_used = 0;
    double peak_abs_rho12 = 0.0;
    double achieved_rel_stderr = 0.0;   // stderr/|mean| at the peak of |<rho_12>|
    bool converged = false;
};

struct EnsembleOptions {
    int n_threads = 0;                  // 0 = hardware concurrency
    StepOptions step{};
    std::string field_spec_digest{};
};

// Realization seeds; defaults to rng::split_seed(base_seed, k).
using SeedFn = std::function<std::uint64_t(std::size_t)>;

// Integrates n_realizations independent noisy-pulse trajectories from the
// ground state and averages them. Realizations are distributed over threads
// in fixed index blocks and combined by a fixed pairwise tree, so the result
// is bit-identical for any thread count. InvariantViolation from a
// realization is rethrown carrying the offending seed (lowest failing index).
EnsembleResult run_ensemble(const SystemParams& params, const NoisyPulseSpec& field_spec,
                            const TimeGrid& grid, const EnsembleSpec& spec,
                            const EnsembleOptions& options = {}, const SeedFn& seed_fn = {});

struct ConvergenceReport {
    double achieved_rel_stderr;
    double target;
    std::size_t n_used;
    std::size_t recommended_n;  // 1/sqrt(N) extrapolation to reach the target
    bool converged;

    std::string summary() const;
};

ConvergenceReport convergence_report(const EnsembleResult& result, double target);

}  // namespace vsim
