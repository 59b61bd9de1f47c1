// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

// vsim: driven V-system density-matrix simulator.
//
// Subcommands:
//   run <config.json>         integrate one scenario to CSV (+ metadata sidecar)
//   reproduce <preset>        run a bundled study preset (fig2..fig7, appendixa)
//   validate <config.json>    parse and cross-check a config, report diagnostics
//   noise-check <config.json> statistical validation of the noisy-pulse ensemble
//   replay <sidecar.json>     re-run from a sidecar and byte-compare the CSV
//
// Exit codes: 0 success, 1 usage/other failure, 2 config error,
// 3 invariant violation, 4 convergence or statistics flag raised.
// Thread count comes from the VSIM_THREADS environment variable only;
// all physics comes from the config file.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>

#include "vsim/csv.hpp"
#include "vsim/runner.hpp"
#include "vsim/version.hpp"

namespace {

int thread_count_from_env() {
    const char* value = std::getenv("VSIM_THREADS");
    if (value == nullptr) return 0;
    const int n = std::atoi(value);
    return n > 0 ? n : 0;
}

void print_outcome(const vsim::RunOutcome& outcome) {
    for (const auto& path : outcome.csv_paths) {
        std::printf("wrote %s\n", path.c_str());
    }
    if (outcome.grid_convergence_checked) {
        std::printf("grid convergence: max population deviation %.3g under dt/2%s\n",
                    outcome.max_population_deviation,
                    outcome.grid_convergence_flagged ? " [FLAGGED]" : "");
    }
    if (outcome.mc_convergence_flagged) {
        std::printf("monte carlo convergence target not reached [FLAGGED]\n");
    }
}

int run_command(const std::string& config_path, const vsim::RunnerOptions& options) {
    const vsim::ScenarioConfig config = vsim::load_config_file(config_path);
    const vsim::RunOutcome outcome = vsim::run_scenario(config, options);
    print_outcome(outcome);
    return outcome.exit_code();
}

int reproduce_command(const std::string& name, const vsim::RunnerOptions& options) {
    const vsim::Figure figure = vsim::figure_from_name(name);
    const vsim::RunOutcome outcome = vsim::reproduce_figure(figure, options);
    print_outcome(outcome);
    return outcome.exit_code();
}

int validate_command(const std::string& config_path) {
    const vsim::ScenarioConfig config = vsim::load_config_file(config_path);
    std::printf("OK: %s\n", vsim::scenario_name(config.scenario).c_str());
    std::printf("grid: t in [%g, %g] fs, dt = %g fs, %zu steps\n", config.grid.t_start,
                config.grid.t_end(), config.grid.dt, config.grid.n_steps);
    return 0;
}

int noise_check_command(const std::string& config_path, const vsim::RunnerOptions& options) {
    const vsim::ScenarioConfig config = vsim::load_config_file(config_path);
    const vsim::NoiseCheckReport report = vsim::noise_check(config, options);
    std::printf("noise check: %zu pairs, %zu realizations\n", report.pairs.size(),
                report.n_realizations);
    std::printf("max |z| = %.3f (threshold %.1f), failing pairs: %zu\n", report.max_abs_z,
                report.threshold, report.n_failing);
    for (const auto& row : report.pairs) {
        if (row.abs_z <= report.threshold) continue;
        std::printf("  t' = %.2f fs, t'' = %.2f fs: sampled (%.4g, %.4g), expected (%.4g, %.4g), "
                    "se %.3g, |z| = %.2f\n",
                    row.t1, row.t2, row.sampled.real(), row.sampled.imag(), row.expected.real(),
                    row.expected.imag(), row.std_error, row.abs_z);
    }
    std::printf("%s\n", report.ok ? "PASS" : "FAIL");
    return report.ok ? 0 : 4;
}

int replay_command(const std::string& sidecar_path, const vsim::RunnerOptions& options) {
    const vsim::ReplayOutcome outcome = vsim::replay(sidecar_path, options);
    std::printf("replayed -> %s\n", outcome.replayed_csv.c_str());
    if (!outcome.original_found) {
        std::printf("original CSV '%s' not found; nothing to compare\n",
                    outcome.original_csv.c_str());
        return 0;
    }
    std::printf("byte comparison vs %s: %s\n", outcome.original_csv.c_str(),
                outcome.identical ? "identical" : "MISMATCH");
    return outcome.identical ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"driven V-system density-matrix simulator"};
    app.set_version_flag("--version", std::string(vsim::kVersion));
    app.require_subcommand(1);

    vsim::RunnerOptions options;
    options.n_threads = thread_count_from_env();

    std::string config_path;
    std::string figure;
    std::string sidecar_path;
    std::string output_dir;

    auto* run = app.add_subcommand("run", "integrate one scenario from a config file");
    run->add_option("config", config_path, "JSON config file")->required();
    run->add_option("--output-dir", output_dir, "directory for output files");

    auto* reproduce = app.add_subcommand("reproduce", "run a bundled study preset");
    reproduce->add_option("preset", figure, "fig2, fig3, fig4, fig5, fig6, fig7, or appendixa")
        ->required();
    reproduce->add_option("--output-dir", output_dir, "directory for output files");

    auto* validate = app.add_subcommand("validate", "check a config file");
    validate->add_option("config", config_path, "JSON config file")->required();

    auto* noise = app.add_subcommand("noise-check",
                                     "validate synthesized noise statistics for a config");
    noise->add_option("config", config_path, "JSON config file")->required();

    auto* rep = app.add_subcommand("replay", "re-run from a sidecar and compare CSVs");
    rep->add_option("sidecar", sidecar_path, "<run>.csv.meta.json sidecar file")->required();
    rep->add_option("--output-dir", output_dir, "directory for the replayed CSV");

    CLI11_PARSE(app, argc, argv);
    options.output_dir = output_dir;

    try {
        if (run->parsed()) return run_command(config_path, options);
        if (reproduce->parsed()) return reproduce_command(figure, options);
        if (validate->parsed()) return validate_command(config_path);
        if (noise->parsed()) return noise_check_command(config_path, options);
        if (rep->parsed()) return replay_command(sidecar_path, options);
    } catch (const vsim::ValidationError& err) {
        std::fprintf(stderr, "config error: %s\n", err.what());
        return 2;
    } catch (const vsim::ParseError& err) {
        std::fprintf(stderr, "config error: %s\n", err.what());
        return 2;
    } catch (const vsim::InvariantViolation& err) {
        std::fprintf(stderr, "invariant violation: %s\n", err.what());
        return 3;
    } catch (const vsim::SimError& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 1;
}
