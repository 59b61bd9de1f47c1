// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#include "vsim/runner.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "vsim/csv.hpp"
#include "vsim/rng.hpp"
#include "vsim/version.hpp"

namespace vsim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kGuardThreshold = 1e-6;  // max population deviation under dt/2

std::string resolve_path(const RunnerOptions& options, const std::string& path) {
    if (options.output_dir.empty() || fs::path(path).is_absolute()) return path;
    fs::create_directories(options.output_dir);
    return (fs::path(options.output_dir) / path).string();
}

// Integrator check: re-run the same sampled field with halved steps and
// report the largest population deviation at the shared sample points.
double integration_deviation(const ScenarioRhs& rhs, const SampledField& field,
                             const DensityState& initial, const TrajectoryRecord& base) {
    StepOptions fine;
    fine.substeps = 2;
    const TrajectoryRecord halved = run_trajectory(rhs, field, initial, fine);
    double dev = 0.0;
    for (std::size_t k = 0; k < base.n_samples(); ++k) {
        dev = std::max(dev, std::abs(base.rho_gg[k] - halved.rho_gg[k]));
        dev = std::max(dev, std::abs(base.rho_11[k] - halved.rho_11[k]));
        dev = std::max(dev, std::abs(base.rho_22[k] - halved.rho_22[k]));
        dev = std::max(dev, std::abs(base.rho_tt[k] - halved.rho_tt[k]));
    }
    return dev;
}

void write_sidecar(const std::string& csv_path, const ScenarioConfig& config,
                   const RunOutcome& outcome, const json& monte_carlo, bool with_stderr,
                   bool with_measures) {
    json meta;
    meta["tool"] = "vsim";
    meta["code_version"] = std::string(kVersion);
    meta["config"] = json::parse(render_config(config));
    meta["csv"] = fs::path(csv_path).filename().string();
    meta["columns"] = csv::column_names(with_stderr, with_measures);
    if (config.ensemble) {
        json seeds;
        seeds["base_seed"] = config.ensemble->base_seed;
        seeds["n_realizations"] = config.ensemble->n_realizations;
        seeds["scheme"] =
            "seed_k = splitmix64_mix(base_seed + (k+1)*0x9E3779B97F4A7C15); "
            "one xoshiro256++ stream per realization";
        meta["seeds"] = seeds;
    } else {
        meta["seeds"] = nullptr;
    }
    json guard;
    guard["checked"] = outcome.grid_convergence_checked;
    guard["max_population_deviation"] = outcome.max_population_deviation;
    guard["threshold"] = kGuardThreshold;
    guard["flagged"] = outcome.grid_convergence_flagged;
    meta["grid_convergence"] = guard;
    meta["monte_carlo"] = monte_carlo;

    const std::string path = csv_path + ".meta.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SimError("cannot open '" + path + "' for writing");
    out << meta.dump(2) << "\n";
}

std::vector<char> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SimError("cannot open '" + path + "'");
    return std::vector<char>(std::istreambuf_iterator<char>(in),
                             std::istreambuf_iterator<char>());
}

json make_json_config(Scenario scenario, const json& overrides) {
    json j = overrides;
    j["scenario"] = scenario_name(scenario);
    return j;
}

}  // namespace

RunOutcome run_scenario(const ScenarioConfig& config_in, const RunnerOptions& options) {
    ScenarioConfig config = config_in;
    if (config.ensemble && options.ensemble_size_override) {
        config.ensemble->n_realizations = std::max<std::size_t>(2, *options.ensemble_size_override);
    }

    const ScenarioRhs rhs = build_rhs(config.system);
    const DensityState initial = new_ground_state();
    const std::string digest = field_spec_digest(config.field);
    const std::string csv_path = resolve_path(options, config.output.path);

    RunOutcome outcome;
    json monte_carlo = nullptr;
    bool with_stderr = false;
    bool with_measures = false;

    if (config.ensemble) {
        const auto& spec = std::get<NoisyPulseSpec>(config.field);
        EnsembleOptions eopts;
        eopts.n_threads = options.n_threads;
        eopts.field_spec_digest = digest;
        const EnsembleResult result =
            run_ensemble(config.system, spec, config.grid, *config.ensemble, eopts);
        outcome.mc_convergence_flagged = !result.converged;

        if (config.output.convergence_check) {
            const NoiseModel model(spec, config.grid);
            const SampledField field0 =
                model.realization(rng::split_seed(config.ensemble->base_seed, 0));
            const TrajectoryRecord base0 = run_trajectory(rhs, field0, initial);
            outcome.grid_convergence_checked = true;
            outcome.max_population_deviation = integration_deviation(rhs, field0, initial, base0);
            outcome.grid_convergence_flagged =
                outcome.max_population_deviation > kGuardThreshold;
        }

        csv::StderrColumns extra;
        extra.re = &result.stderr_re_rho12;
        extra.im = &result.stderr_im_rho12;
        with_stderr = true;
        if (result.mean_C_of_realizations) {
            extra.mean_of_measures = &*result.mean_C_of_realizations;
            with_measures = true;
        }
        csv::write_trajectory_csv(csv_path, result.mean_record, extra);

        monte_carlo = json{{"n_realizations", result.n_used},
                           {"achieved_rel_stderr", result.achieved_rel_stderr},
                           {"convergence_target", config.ensemble->convergence_target},
                           {"converged", result.converged}};
    } else {
        SampledField field;
        if (const auto* pulse = std::get_if<PulseTrainSpec>(&config.field)) {
            field = eval_pulse_train(*pulse, config.grid);
        } else {
            field = eval_cw(std::get<CwSpec>(config.field), config.grid);
        }
        const TrajectoryRecord record = run_trajectory(rhs, field, initial, {}, digest);
        if (config.output.convergence_check) {
            outcome.grid_convergence_checked = true;
            outcome.max_population_deviation = integration_deviation(rhs, field, initial, record);
            outcome.grid_convergence_flagged =
                outcome.max_population_deviation > kGuardThreshold;
        }
        csv::write_trajectory_csv(csv_path, record);
    }

    if (config.output.sidecar) {
        write_sidecar(csv_path, config, outcome, monte_carlo, with_stderr, with_measures);
    }
    outcome.csv_paths.push_back(csv_path);
    return outcome;
}

std::string figure_name(Figure f) {
    switch (f) {
        case Figure::Fig2: return "fig2";
        case Figure::Fig3: return "fig3";
        case Figure::Fig4: return "fig4";
        case Figure::Fig5: return "fig5";
        case Figure::Fig6: return "fig6";
        case Figure::Fig7: return "fig7";
        case Figure::AppendixA: return "appendixa";
    }
    return "unknown";
}

Figure figure_from_name(const std::string& name) {
    std::string key;
    for (const char ch : name) {
        if (ch == '-' || ch == '_' || ch == ' ') continue;
        key += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    for (const Figure f : {Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5, Figure::Fig6,
                           Figure::Fig7, Figure::AppendixA}) {
        if (figure_name(f) == key) return f;
    }
    throw ParseError("unknown figure '" + name +
                     "' (expected fig2..fig7 or appendixa)");
}

RunOutcome reproduce_figure(Figure figure, const RunnerOptions& options) {
    struct Curve {
        std::string label;
        json overrides;
        Scenario scenario;
    };
    std::vector<Curve> curves;
    const std::string prefix = figure_name(figure);

    const auto sink_label = [](double ts) {
        std::ostringstream s;
        s << "sink" << ts << "fs";
        return s.str();
    };
    const auto tc_label = [](double tc) {
        std::ostringstream s;
        s << "tc" << tc << "fs";
        std::string text = s.str();
        std::replace(text.begin(), text.end(), '.', 'p');
        return text;
    };

    switch (figure) {
        case Figure::Fig2:
        case Figure::Fig3: {
            for (const double ts : {20.0, 50.0, 140.0, 500.0}) {
                curves.push_back({sink_label(ts), json{{"system", {{"sink_time_fs", ts}}}},
                                  Scenario::CoherentPulseTrap});
            }
            break;
        }
        case Figure::Fig4:
        case Figure::Fig7: {
            for (const double tc : {44.5, 89.0, 178.0}) {
                curves.push_back(
                    {tc_label(tc),
                     json{{"system", {{"tau_c_fs", tc}, {"sink_time_fs", 140.0}}}},
                     Scenario::CwGround});
            }
            break;
        }
        case Figure::Fig5: {
            for (const double tc : {89.0, 356.0}) {
                curves.push_back(
                    {tc_label(tc),
                     json{{"system", {{"tau_c_fs", tc}, {"sink_time_fs", 20.0}}}},
                     Scenario::NoisyPulseTrap});
            }
            break;
        }
        case Figure::Fig6: {
            for (const double ts : {20.0, 140.0}) {
                curves.push_back(
                    {sink_label(ts),
                     json{{"system", {{"tau_c_fs", 89.0}, {"sink_time_fs", ts}}}},
                     Scenario::NoisyPulseTrap});
            }
            curves.push_back({"notrap", json{{"system", {{"tau_c_fs", 89.0}}}},
                              Scenario::NoisyPulseNoTrap});
            break;
        }
        case Figure::AppendixA: {
            for (const double ts : {20.0, 140.0}) {
                curves.push_back({sink_label(ts), json{{"system", {{"sink_time_fs", ts}}}},
                                  Scenario::CwTrap});
            }
            break;
        }
    }

    RunOutcome combined;
    for (const auto& curve : curves) {
        json j = make_json_config(curve.scenario, curve.overrides);
        j["output"] = json{{"path", prefix + "_" + curve.label + ".csv"}};
        ScenarioConfig config = parse_config(j.dump());
        const RunOutcome one = run_scenario(config, options);
        combined.csv_paths.insert(combined.csv_paths.end(), one.csv_paths.begin(),
                                  one.csv_paths.end());
        combined.grid_convergence_checked |= one.grid_convergence_checked;
        combined.max_population_deviation =
            std::max(combined.max_population_deviation, one.max_population_deviation);
        combined.grid_convergence_flagged |= one.grid_convergence_flagged;
        combined.mc_convergence_flagged |= one.mc_convergence_flagged;
    }
    return combined;
}

ReplayOutcome replay(const std::string& sidecar_path, const RunnerOptions& options) {
    json meta;
    try {
        const auto bytes = read_bytes(sidecar_path);
        meta = json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& err) {
        throw ParseError("sidecar '" + sidecar_path + "' is not valid JSON: " + err.what());
    }
    if (!meta.contains("config") || !meta.contains("csv")) {
        throw ParseError("sidecar '" + sidecar_path + "' lacks config/csv entries");
    }

    ScenarioConfig config = parse_config(meta["config"].dump());
    const fs::path sidecar_dir = fs::path(sidecar_path).parent_path();
    const std::string csv_name = meta["csv"].get<std::string>();

    ReplayOutcome outcome;
    outcome.original_csv = (sidecar_dir / csv_name).string();
    outcome.original_found = fs::exists(outcome.original_csv);

    // Replay writes next to the original (or into output_dir) and skips the
    // sidecar/guard, neither of which affects the CSV bytes.
    ScenarioConfig replay_config = config;
    replay_config.output.path = csv_name + ".replay.csv";
    replay_config.output.sidecar = false;
    replay_config.output.convergence_check = false;

    RunnerOptions replay_options = options;
    if (replay_options.output_dir.empty()) replay_options.output_dir = sidecar_dir.string();
    if (replay_options.output_dir.empty()) replay_options.output_dir = ".";

    const RunOutcome run = run_scenario(replay_config, replay_options);
    outcome.replayed_csv = run.csv_paths.front();

    if (outcome.original_found) {
        outcome.identical = read_bytes(outcome.original_csv) == read_bytes(outcome.replayed_csv);
    }
    return outcome;
}

NoiseCheckReport noise_check(const ScenarioConfig& config, const RunnerOptions& options) {
    const auto* spec = std::get_if<NoisyPulseSpec>(&config.field);
    if (spec == nullptr || !config.ensemble) {
        throw WrongScenario("noise-check requires a noisy_pulse scenario with an ensemble");
    }

    const NoiseModel model(*spec, config.grid);
    const TimeGrid& grid = config.grid;
    std::size_t n = config.ensemble->n_realizations;
    if (options.ensemble_size_override) n = std::max<std::size_t>(2, *options.ensemble_size_override);

    const auto snap = [&grid](double t) -> std::size_t {
        const double u = (t - grid.t_start) / grid.dt;
        const auto k = static_cast<long long>(std::llround(std::max(u, 0.0)));
        return std::min<std::size_t>(static_cast<std::size_t>(k), grid.n_steps);
    };

    std::set<IndexPair> unique_pairs;
    for (const double c : spec->centers) {
        for (const double off : {-1.5, -1.0, -0.5, -0.2, 0.0, 0.2, 0.5, 1.0, 1.5}) {
            const std::size_t k = snap(c + off * spec->tau_p);
            unique_pairs.insert({k, k});
        }
        for (const double base_off : {-0.5, 0.0, 0.5}) {
            for (const double lag : {0.5, 1.0, 2.0, 3.0, 5.0}) {
                const std::size_t k = snap(c + base_off * spec->tau_p);
                const std::size_t l = snap(c + base_off * spec->tau_p + lag * spec->tau_d);
                unique_pairs.insert({k, l});
            }
        }
    }
    for (std::size_t i = 0; i < spec->centers.size(); ++i) {
        for (std::size_t j = i + 1; j < spec->centers.size(); ++j) {
            for (const double d1 : {0.0, 0.5 * spec->tau_p}) {
                for (const double d2 : {0.0, 0.5 * spec->tau_p}) {
                    unique_pairs.insert({snap(spec->centers[i] + d1),
                                         snap(spec->centers[j] + d2)});
                }
            }
        }
    }
    const std::vector<IndexPair> pairs(unique_pairs.begin(), unique_pairs.end());

    const std::uint64_t base_seed = config.ensemble->base_seed;
    const auto estimates = estimate_two_time_correlation(
        [&model, base_seed](std::size_t i) {
            return model.realization(rng::split_seed(base_seed, i));
        },
        n, pairs, options.n_threads);

    NoiseCheckReport report;
    report.n_realizations = n;
    report.pairs.reserve(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        NoiseCheckPair row;
        row.t1 = grid.time(pairs[p].first);
        row.t2 = grid.time(pairs[p].second);
        row.sampled = estimates[p].mean;
        row.expected = model.expected_correlation(pairs[p].first, pairs[p].second);
        row.std_error = estimates[p].std_error;
        const double diff = std::abs(row.sampled - row.expected);
        row.abs_z = row.std_error > 0.0
                        ? diff / row.std_error
                        : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        report.max_abs_z = std::max(report.max_abs_z, row.abs_z);
        if (row.abs_z > report.threshold) ++report.n_failing;
        report.pairs.push_back(row);
    }
    report.ok = report.n_failing == 0;
    return report;
}

}  // namespace vsim
