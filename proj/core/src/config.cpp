// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#include "vsim/config.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "vsim/units.hpp"

namespace vsim {

using nlohmann::json;

namespace {

struct Issues {
    std::vector<std::string> list;

    void add(const std::string& path, const std::string& problem) {
        list.push_back(path + ": " + problem);
    }
    void raise_if_any() {
        if (!list.empty()) throw ValidationError(std::move(list));
    }
};

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed,
                Issues& issues) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) issues.add(path + "." + key, "unknown key");
    }
}

std::optional<double> get_number(const json& obj, const std::string& key, const std::string& path,
                                 Issues& issues) {
    if (!obj.contains(key)) return std::nullopt;
    if (!obj[key].is_number()) {
        issues.add(path + "." + key, "must be a number");
        return std::nullopt;
    }
    return obj[key].get<double>();
}

std::optional<bool> get_bool(const json& obj, const std::string& key, const std::string& path,
                             Issues& issues) {
    if (!obj.contains(key)) return std::nullopt;
    if (!obj[key].is_boolean()) {
        issues.add(path + "." + key, "must be a boolean");
        return std::nullopt;
    }
    return obj[key].get<bool>();
}

std::optional<std::string> get_string(const json& obj, const std::string& key,
                                      const std::string& path, Issues& issues) {
    if (!obj.contains(key)) return std::nullopt;
    if (!obj[key].is_string()) {
        issues.add(path + "." + key, "must be a string");
        return std::nullopt;
    }
    return obj[key].get<std::string>();
}

bool is_noisy(Scenario s) {
    return s == Scenario::NoisyPulseTrap || s == Scenario::NoisyPulseNoTrap;
}

SinkTarget sink_for(Scenario s) {
    switch (s) {
        case Scenario::CoherentPulseTrap:
        case Scenario::CwTrap:
        case Scenario::NoisyPulseTrap: return SinkTarget::Trap;
        case Scenario::CwGround: return SinkTarget::Ground;
        case Scenario::NoisyPulseNoTrap: return SinkTarget::None;
    }
    return SinkTarget::None;
}

double default_sink_time(Scenario s) {
    switch (s) {
        case Scenario::CoherentPulseTrap:
        case Scenario::NoisyPulseTrap: return 20.0;
        case Scenario::CwGround:
        case Scenario::CwTrap: return 140.0;
        case Scenario::NoisyPulseNoTrap: return 0.0;  // unused
    }
    return 0.0;
}

const char* expected_field_type(Scenario s) {
    switch (s) {
        case Scenario::CoherentPulseTrap: return "pulse_train";
        case Scenario::CwGround:
        case Scenario::CwTrap: return "cw";
        case Scenario::NoisyPulseTrap:
        case Scenario::NoisyPulseNoTrap: return "noisy_pulse";
    }
    return "";
}

SystemParams parse_system(const json& root, Scenario scenario, Issues& issues) {
    SystemParams params;
    params.sink_target = sink_for(scenario);
    params.rabi_scale = is_noisy(scenario) ? units::angular_from_ghz(631.0)
                                           : units::angular_from_thz(10.0);
    params.gamma_t = scenario == Scenario::NoisyPulseNoTrap
                         ? 0.0
                         : units::rate_from_time(default_sink_time(scenario));

    if (!root.contains("system")) return params;
    const json& sys = root["system"];
    if (!sys.is_object()) {
        issues.add("system", "must be an object");
        return params;
    }
    check_keys(sys, "system",
               {"tau_c_fs", "omega_21_rad_per_fs", "rabi_thz", "rabi_ghz", "rabi_rad_per_fs",
                "sink_time_fs", "gamma_t_per_fs", "carrier_detuning_rad_per_fs", "ig_damping"},
               issues);

    const auto tau_c = get_number(sys, "tau_c_fs", "system", issues);
    const auto omega21 = get_number(sys, "omega_21_rad_per_fs", "system", issues);
    if (tau_c && omega21) {
        issues.add("system", "give either tau_c_fs or omega_21_rad_per_fs, not both");
    } else if (tau_c) {
        if (!(*tau_c > 0.0)) issues.add("system.tau_c_fs", "must be positive");
        else params.omega_21 = units::splitting_from_period(*tau_c);
    } else if (omega21) {
        if (!(*omega21 >= 0.0)) issues.add("system.omega_21_rad_per_fs", "must be >= 0");
        else params.omega_21 = *omega21;
    }

    const auto rabi_thz = get_number(sys, "rabi_thz", "system", issues);
    const auto rabi_ghz = get_number(sys, "rabi_ghz", "system", issues);
    const auto rabi_raw = get_number(sys, "rabi_rad_per_fs", "system", issues);
    const int rabi_given = int(bool(rabi_thz)) + int(bool(rabi_ghz)) + int(bool(rabi_raw));
    if (rabi_given > 1) {
        issues.add("system", "give at most one of rabi_thz, rabi_ghz, rabi_rad_per_fs");
    } else if (rabi_thz) {
        if (!(*rabi_thz > 0.0)) issues.add("system.rabi_thz", "must be positive");
        else params.rabi_scale = units::angular_from_thz(*rabi_thz);
    } else if (rabi_ghz) {
        if (!(*rabi_ghz > 0.0)) issues.add("system.rabi_ghz", "must be positive");
        else params.rabi_scale = units::angular_from_ghz(*rabi_ghz);
    } else if (rabi_raw) {
        if (!(*rabi_raw > 0.0)) issues.add("system.rabi_rad_per_fs", "must be positive");
        else params.rabi_scale = *rabi_raw;
    }

    const auto sink_time = get_number(sys, "sink_time_fs", "system", issues);
    const auto gamma = get_number(sys, "gamma_t_per_fs", "system", issues);
    if (scenario == Scenario::NoisyPulseNoTrap) {
        if (sink_time || (gamma && *gamma != 0.0)) {
            issues.add("system", "noisy_pulse_no_trap has no sink; drop sink_time_fs/gamma_t_per_fs");
        }
    } else if (sink_time && gamma) {
        issues.add("system", "give either sink_time_fs or gamma_t_per_fs, not both");
    } else if (sink_time) {
        if (!(*sink_time > 0.0)) issues.add("system.sink_time_fs", "must be positive");
        else params.gamma_t = units::rate_from_time(*sink_time);
    } else if (gamma) {
        if (!(*gamma >= 0.0)) issues.add("system.gamma_t_per_fs", "must be >= 0");
        else params.gamma_t = *gamma;
    }

    if (const auto det = get_number(sys, "carrier_detuning_rad_per_fs", "system", issues)) {
        params.carrier_detuning = *det;
    }
    if (const auto damping = get_string(sys, "ig_damping", "system", issues)) {
        if (*damping == "gamma_half") params.ig_damping = IgDamping::GammaHalf;
        else if (*damping == "gamma_quarter") params.ig_damping = IgDamping::GammaQuarter;
        else issues.add("system.ig_damping", "must be 'gamma_half' or 'gamma_quarter'");
    }
    return params;
}

std::vector<double> parse_centers(const json& fld, const std::string& path,
                                  std::vector<double> fallback, Issues& issues) {
    if (!fld.contains("centers_fs")) return fallback;
    const json& arr = fld["centers_fs"];
    if (!arr.is_array() || arr.empty()) {
        issues.add(path + ".centers_fs", "must be a non-empty array of times");
        return fallback;
    }
    std::vector<double> centers;
    for (const auto& v : arr) {
        if (!v.is_number()) {
            issues.add(path + ".centers_fs", "entries must be numbers");
            return fallback;
        }
        centers.push_back(v.get<double>());
    }
    for (std::size_t i = 1; i < centers.size(); ++i) {
        if (!(centers[i] > centers[i - 1])) {
            issues.add(path + ".centers_fs", "must be strictly increasing");
            return fallback;
        }
    }
    return centers;
}

FieldSpec parse_field(const json& root, Scenario scenario, Issues& issues) {
    const std::string want = expected_field_type(scenario);
    const json empty = json::object();
    const json& fld = root.contains("field") ? root["field"] : empty;
    if (!fld.is_object()) {
        issues.add("field", "must be an object");
        return PulseTrainSpec{};
    }

    std::string type = want;
    if (const auto given = get_string(fld, "type", "field", issues)) type = *given;
    if (type != want) {
        issues.add("field.type", "scenario '" + scenario_name(scenario) + "' requires field type '" +
                                     want + "', got '" + type + "'");
        type = want;
    }

    if (type == "pulse_train") {
        check_keys(fld, "field", {"type", "amplitude_scale", "tau_p_fs", "centers_fs"}, issues);
        PulseTrainSpec spec;
        if (const auto amp = get_number(fld, "amplitude_scale", "field", issues)) {
            if (!(*amp >= 0.0)) issues.add("field.amplitude_scale", "must be >= 0");
            else spec.amplitude_scale = *amp;
        }
        if (const auto tau_p = get_number(fld, "tau_p_fs", "field", issues)) {
            if (!(*tau_p > 0.0)) issues.add("field.tau_p_fs", "must be positive");
            else spec.tau_p = *tau_p;
        }
        spec.centers = parse_centers(fld, "field", spec.centers, issues);
        return spec;
    }
    if (type == "cw") {
        check_keys(fld, "field", {"type", "amplitude_scale", "detuning_rad_per_fs"}, issues);
        CwSpec spec;
        if (const auto amp = get_number(fld, "amplitude_scale", "field", issues)) {
            if (!(*amp >= 0.0)) issues.add("field.amplitude_scale", "must be >= 0");
            else spec.amplitude_scale = *amp;
        }
        if (const auto det = get_number(fld, "detuning_rad_per_fs", "field", issues)) {
            spec.detuning_from_midpoint = *det;
        }
        return spec;
    }

    check_keys(fld, "field",
               {"type", "amplitude_scale", "tau_p_fs", "tau_d_fs", "centers_fs",
                "carrier_offset_rad_per_fs", "noise_coupling"},
               issues);
    NoisyPulseSpec spec;
    if (const auto amp = get_number(fld, "amplitude_scale", "field", issues)) {
        if (!(*amp >= 0.0)) issues.add("field.amplitude_scale", "must be >= 0");
        else spec.amplitude_scale = *amp;
    }
    if (const auto tau_p = get_number(fld, "tau_p_fs", "field", issues)) {
        if (!(*tau_p > 0.0)) issues.add("field.tau_p_fs", "must be positive");
        else spec.tau_p = *tau_p;
    }
    // tau_d defaults to tau_p/10 (strongly noisy regime) unless given.
    spec.tau_d = spec.tau_p / 10.0;
    if (const auto tau_d = get_number(fld, "tau_d_fs", "field", issues)) {
        if (!(*tau_d > 0.0)) issues.add("field.tau_d_fs", "must be positive");
        else spec.tau_d = *tau_d;
    }
    spec.centers = parse_centers(fld, "field", spec.centers, issues);
    if (const auto off = get_number(fld, "carrier_offset_rad_per_fs", "field", issues)) {
        spec.carrier_offset = *off;
    }
    if (const auto coupling = get_string(fld, "noise_coupling", "field", issues)) {
        if (*coupling == "shared") spec.coupling = NoiseCoupling::Shared;
        else if (*coupling == "independent") spec.coupling = NoiseCoupling::IndependentPerPulse;
        else issues.add("field.noise_coupling", "must be 'shared' or 'independent'");
    }
    return spec;
}

std::optional<EnsembleSpec> parse_ensemble(const json& root, Scenario scenario, Issues& issues) {
    if (!is_noisy(scenario)) {
        if (root.contains("ensemble")) {
            issues.add("ensemble", "only valid for noisy_pulse scenarios");
        }
        return std::nullopt;
    }
    EnsembleSpec spec;
    if (!root.contains("ensemble")) return spec;
    const json& ens = root["ensemble"];
    if (!ens.is_object()) {
        issues.add("ensemble", "must be an object");
        return spec;
    }
    check_keys(ens, "ensemble",
               {"n_realizations", "base_seed", "convergence_target", "per_realization_measure"},
               issues);
    if (ens.contains("n_realizations")) {
        if (!ens["n_realizations"].is_number_unsigned()) {
            issues.add("ensemble.n_realizations", "must be a non-negative integer");
        } else {
            spec.n_realizations = ens["n_realizations"].get<std::size_t>();
            if (spec.n_realizations < 2) issues.add("ensemble.n_realizations", "must be >= 2");
        }
    }
    if (ens.contains("base_seed")) {
        if (!ens["base_seed"].is_number_unsigned()) {
            issues.add("ensemble.base_seed", "must be a non-negative integer");
        } else {
            spec.base_seed = ens["base_seed"].get<std::uint64_t>();
        }
    }
    if (const auto target = get_number(ens, "convergence_target", "ensemble", issues)) {
        if (!(*target > 0.0)) issues.add("ensemble.convergence_target", "must be positive");
        else spec.convergence_target = *target;
    }
    if (const auto flag = get_bool(ens, "per_realization_measure", "ensemble", issues)) {
        spec.per_realization_measure = *flag;
    }
    return spec;
}

// Largest "round" spacing not exceeding x.
double nice_floor(double x) {
    const double e = std::floor(std::log10(x));
    for (const double m : {8.0, 5.0, 4.0, 2.5, 2.0, 1.6, 1.25, 1.0}) {
        const double v = m * std::pow(10.0, e);
        if (v <= x * (1.0 + 1e-12)) return v;
    }
    return std::pow(10.0, e);
}

// Step size keeping the accumulated RK4 phase error (which surfaces as
// eigenvalue drift of near-pure states) below ~1e-9 over the damping window:
// drift ~ T_eff * omega^5 * h^4 / 120 with T_eff = min(T, 3/gamma).
double accuracy_dt(const SystemParams& system, double t_span) {
    double omega = std::max(system.omega_21, system.rabi_scale);
    omega = std::max(omega, 0.5 * system.omega_21 + std::abs(system.carrier_detuning));
    if (!(omega > 0.0)) return std::numeric_limits<double>::infinity();
    double t_eff = t_span;
    if (system.gamma_t > 0.0) t_eff = std::min(t_eff, 3.0 / system.gamma_t);
    constexpr double kDriftTarget = 1e-9;
    return std::pow(kDriftTarget * 120.0 / (t_eff * std::pow(omega, 5.0)), 0.25);
}

struct SpanDefaults {
    double t_start;
    double t_end;
};

SpanDefaults default_span(const FieldSpec& field) {
    if (const auto* pulse = std::get_if<PulseTrainSpec>(&field)) {
        const double lead = pulse->centers.front() - 5.0 * pulse->tau_p;
        const double tail = std::max(5.0 * pulse->tau_p, 250.0);
        return {std::min(0.0, lead), pulse->centers.back() + tail};
    }
    if (const auto* noisy = std::get_if<NoisyPulseSpec>(&field)) {
        const double lead = noisy->centers.front() - 5.0 * noisy->tau_p;
        const double tail = std::max(5.0 * noisy->tau_p, 250.0);
        return {std::min(0.0, lead), noisy->centers.back() + tail};
    }
    return {0.0, 5000.0};
}

TimeGrid parse_grid(const json& root, const SystemParams& system, const FieldSpec& field,
                    Issues& issues) {
    const double cap = resolution_cap(system, field);
    const SpanDefaults span = default_span(field);

    double t_start = span.t_start;
    double t_end = span.t_end;
    std::optional<double> user_dt;
    std::optional<std::size_t> n_steps;

    if (root.contains("grid")) {
        const json& grid = root["grid"];
        if (!grid.is_object()) {
            issues.add("grid", "must be an object");
            return TimeGrid{t_start, cap, 1};
        }
        check_keys(grid, "grid", {"t_start_fs", "t_end_fs", "dt_fs", "n_steps"}, issues);
        if (const auto v = get_number(grid, "t_start_fs", "grid", issues)) t_start = *v;
        if (const auto v = get_number(grid, "dt_fs", "grid", issues)) {
            if (!(*v > 0.0)) issues.add("grid.dt_fs", "must be positive");
            else user_dt = *v;
        }
        const bool has_end = grid.contains("t_end_fs");
        const bool has_steps = grid.contains("n_steps");
        if (has_end && has_steps) {
            issues.add("grid", "give either t_end_fs or n_steps, not both");
        } else if (has_steps) {
            if (!grid["n_steps"].is_number_unsigned() || grid["n_steps"].get<std::size_t>() == 0) {
                issues.add("grid.n_steps", "must be a positive integer");
            } else if (!user_dt) {
                issues.add("grid.n_steps", "requires dt_fs");
            } else {
                n_steps = grid["n_steps"].get<std::size_t>();
            }
        } else if (has_end) {
            if (const auto v = get_number(grid, "t_end_fs", "grid", issues)) t_end = *v;
        }
    }

    double dt;
    if (user_dt) {
        // User spacing is checked against the hard caps only.
        if (*user_dt > cap * (1.0 + 1e-9)) {
            std::ostringstream msg;
            msg << "exceeds the resolution cap " << cap
                << " fs (min over active scales of tau_c/50, 1/rabi/50, tau_p/50, 1/gamma/50, "
                   "tau_d/20)";
            issues.add("grid.dt_fs", msg.str());
            return TimeGrid{t_start, *user_dt, 1};
        }
        dt = *user_dt;
    } else {
        // Builder spacing additionally honors the integration-accuracy bound.
        dt = nice_floor(std::min(cap, accuracy_dt(system, t_end - t_start)));
    }

    if (n_steps) return TimeGrid{t_start, dt, *n_steps};
    if (!(t_end > t_start)) {
        issues.add("grid.t_end_fs", "must be greater than t_start_fs");
        return TimeGrid{t_start, dt, 1};
    }
    return TimeGrid::span(t_start, t_end, dt);
}

OutputOptions parse_output(const json& root, Scenario scenario, Issues& issues) {
    OutputOptions out;
    out.path = scenario_name(scenario) + ".csv";
    if (!root.contains("output")) return out;
    const json& obj = root["output"];
    if (!obj.is_object()) {
        issues.add("output", "must be an object");
        return out;
    }
    check_keys(obj, "output", {"path", "sidecar", "convergence_check"}, issues);
    if (const auto path = get_string(obj, "path", "output", issues)) {
        if (path->empty()) issues.add("output.path", "must not be empty");
        else out.path = *path;
    }
    if (const auto flag = get_bool(obj, "sidecar", "output", issues)) out.sidecar = *flag;
    if (const auto flag = get_bool(obj, "convergence_check", "output", issues)) {
        out.convergence_check = *flag;
    }
    return out;
}

json render_field(const FieldSpec& field) {
    json f;
    if (const auto* pulse = std::get_if<PulseTrainSpec>(&field)) {
        f["type"] = "pulse_train";
        f["amplitude_scale"] = pulse->amplitude_scale;
        f["tau_p_fs"] = pulse->tau_p;
        f["centers_fs"] = pulse->centers;
    } else if (const auto* cw = std::get_if<CwSpec>(&field)) {
        f["type"] = "cw";
        f["amplitude_scale"] = cw->amplitude_scale;
        f["detuning_rad_per_fs"] = cw->detuning_from_midpoint;
    } else if (const auto* noisy = std::get_if<NoisyPulseSpec>(&field)) {
        f["type"] = "noisy_pulse";
        f["amplitude_scale"] = noisy->amplitude_scale;
        f["tau_p_fs"] = noisy->tau_p;
        f["tau_d_fs"] = noisy->tau_d;
        f["centers_fs"] = noisy->centers;
        f["carrier_offset_rad_per_fs"] = noisy->carrier_offset;
        f["noise_coupling"] =
            noisy->coupling == NoiseCoupling::Shared ? "shared" : "independent";
    }
    return f;
}

}  // namespace

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::CoherentPulseTrap: return "coherent_pulse_trap";
        case Scenario::CwGround: return "cw_ground";
        case Scenario::CwTrap: return "cw_trap";
        case Scenario::NoisyPulseTrap: return "noisy_pulse_trap";
        case Scenario::NoisyPulseNoTrap: return "noisy_pulse_no_trap";
    }
    return "unknown";
}

Scenario scenario_from_name(const std::string& name) {
    for (const Scenario s :
         {Scenario::CoherentPulseTrap, Scenario::CwGround, Scenario::CwTrap,
          Scenario::NoisyPulseTrap, Scenario::NoisyPulseNoTrap}) {
        if (scenario_name(s) == name) return s;
    }
    throw ParseError("unknown scenario '" + name +
                     "' (expected coherent_pulse_trap, cw_ground, cw_trap, noisy_pulse_trap, "
                     "or noisy_pulse_no_trap)");
}

double resolution_cap(const SystemParams& system, const FieldSpec& field) {
    double cap = std::numeric_limits<double>::infinity();
    if (system.omega_21 > 0.0) cap = std::min(cap, system.excited_period() / 50.0);
    if (system.rabi_scale > 0.0) cap = std::min(cap, 1.0 / system.rabi_scale / 50.0);
    if (system.gamma_t > 0.0) cap = std::min(cap, system.sink_time() / 50.0);
    if (const auto* pulse = std::get_if<PulseTrainSpec>(&field)) {
        cap = std::min(cap, pulse->tau_p / 50.0);
    } else if (const auto* noisy = std::get_if<NoisyPulseSpec>(&field)) {
        cap = std::min(cap, noisy->tau_p / 50.0);
        cap = std::min(cap, noisy->tau_d / 20.0);
    }
    if (!std::isfinite(cap)) cap = 1.0;
    return cap;
}

ScenarioConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
    } catch (const json::exception& err) {
        throw ParseError(std::string("config is not valid JSON: ") + err.what());
    }
    if (!root.is_object()) throw ParseError("config must be a JSON object");

    Issues issues;
    check_keys(root, "config", {"scenario", "system", "field", "grid", "ensemble", "output"},
               issues);

    if (!root.contains("scenario") || !root["scenario"].is_string()) {
        issues.add("scenario", "required string");
        issues.raise_if_any();
    }
    const Scenario scenario = scenario_from_name(root["scenario"].get<std::string>());

    ScenarioConfig config;
    config.scenario = scenario;
    config.system = parse_system(root, scenario, issues);
    config.field = parse_field(root, scenario, issues);
    config.ensemble = parse_ensemble(root, scenario, issues);
    config.output = parse_output(root, scenario, issues);
    config.grid = parse_grid(root, config.system, config.field, issues);

    issues.raise_if_any();
    return config;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string render_config(const ScenarioConfig& config) {
    json root;
    root["scenario"] = scenario_name(config.scenario);
    json sys;
    sys["omega_21_rad_per_fs"] = config.system.omega_21;
    sys["rabi_rad_per_fs"] = config.system.rabi_scale;
    if (config.scenario != Scenario::NoisyPulseNoTrap) {
        sys["gamma_t_per_fs"] = config.system.gamma_t;
    }
    sys["carrier_detuning_rad_per_fs"] = config.system.carrier_detuning;
    sys["ig_damping"] =
        config.system.ig_damping == IgDamping::GammaHalf ? "gamma_half" : "gamma_quarter";
    root["system"] = sys;
    root["field"] = render_field(config.field);
    json grid;
    grid["t_start_fs"] = config.grid.t_start;
    grid["dt_fs"] = config.grid.dt;
    grid["n_steps"] = config.grid.n_steps;
    root["grid"] = grid;
    if (config.ensemble) {
        json ens;
        ens["n_realizations"] = config.ensemble->n_realizations;
        ens["base_seed"] = config.ensemble->base_seed;
        ens["convergence_target"] = config.ensemble->convergence_target;
        ens["per_realization_measure"] = config.ensemble->per_realization_measure;
        root["ensemble"] = ens;
    }
    json out;
    out["path"] = config.output.path;
    out["sidecar"] = config.output.sidecar;
    out["convergence_check"] = config.output.convergence_check;
    root["output"] = out;
    return root.dump(2) + "\n";
}

ScenarioConfig default_config(Scenario scenario) {
    return parse_config("{\"scenario\": \"" + scenario_name(scenario) + "\"}");
}

std::string field_spec_digest(const FieldSpec& spec) {
    return render_field(spec).dump();
}

}  // namespace vsim
