// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vsim/config.hpp"

namespace vsim {

struct RunnerOptions {
    int n_threads = 0;                                  // 0 = hardware concurrency
    std::string output_dir;                             // prefix for relative output paths
    std::optional<std::size_t> ensemble_size_override;  // for quick exploratory runs
};

struct RunOutcome {
    std::vector<std::string> csv_paths;
    bool grid_convergence_checked = false;
    double max_population_deviation = 0.0;
    bool grid_convergence_flagged = false;
    bool mc_convergence_flagged = false;

    // 0 success, 4 when a convergence flag was raised. Config errors (2) and
    // invariant violations (3) surface as exceptions and are mapped by the CLI.
    int exit_code() const {
        return (grid_convergence_flagged || mc_convergence_flagged) ? 4 : 0;
    }
};

// Runs one scenario to CSV (+ sidecar metadata). Noisy scenarios run the full
// ensemble; others integrate a single deterministic trajectory.
RunOutcome run_scenario(const ScenarioConfig& config, const RunnerOptions& options = {});

enum class Figure { Fig2, Fig3, Fig4, Fig5, Fig6, Fig7, AppendixA };

std::string figure_name(Figure f);
Figure figure_from_name(const std::string& name);  // case-insensitive, throws ParseError

// Runs the parameter sweep behind one figure and emits one labeled CSV per
// curve into options.output_dir.
RunOutcome reproduce_figure(Figure figure, const RunnerOptions& options = {});

struct ReplayOutcome {
    std::string replayed_csv;
    std::string original_csv;
    bool original_found = false;
    bool identical = false;
};

// Re-runs the configuration stored in a sidecar file and byte-compares the
// fresh CSV against the original.
ReplayOutcome replay(const std::string& sidecar_path, const RunnerOptions& options = {});

struct NoiseCheckPair {
    double t1, t2;
    Complex sampled;
    Complex expected;
    double std_error;
    double abs_z;
};

struct NoiseCheckReport {
    std::size_t n_realizations = 0;
    std::vector<NoiseCheckPair> pairs;
    double max_abs_z = 0.0;
    std::size_t n_failing = 0;  // |z| > threshold
    double threshold = 4.0;
    bool ok = false;
};

// Standalone statistical validation of the synthesized noisy-pulse ensemble
// against its two-time correlation model, on the config's grid and ensemble
// size. Probes diagonal, intra-pulse off-diagonal, and cross-pulse pairs.
NoiseCheckReport noise_check(const ScenarioConfig& config, const RunnerOptions& options = {});

}  // namespace vsim
