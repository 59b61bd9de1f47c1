// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "vsim/ensemble.hpp"
#include "vsim/fields.hpp"
#include "vsim/state.hpp"

namespace vsim {

enum class Scenario {
    CoherentPulseTrap,
    CwGround,
    CwTrap,
    NoisyPulseTrap,
    NoisyPulseNoTrap,
};

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);  // throws ParseError

struct OutputOptions {
    std::string path;                // CSV output file
    bool sidecar = true;             // write <path>.meta.json
    bool convergence_check = true;   // dt/2 re-integration guard

    bool operator==(const OutputOptions&) const = default;
};

// Fully validated run description. `system.sink_target` is derived from the
// scenario; grid and dt are filled in by the scenario builder when omitted.
struct ScenarioConfig {
    Scenario scenario = Scenario::CoherentPulseTrap;
    SystemParams system;
    FieldSpec field;
    TimeGrid grid;
    std::optional<EnsembleSpec> ensemble;
    OutputOptions output;

    bool operator==(const ScenarioConfig&) const = default;
};

// Parses a JSON config document (// and /* */ comments allowed). Unknown or
// conflicting keys, bad values, and scenario/field/sink mismatches produce a
// ValidationError listing every offending field path. Paper-scale defaults
// are pre-filled for everything omitted.
ScenarioConfig parse_config(const std::string& text);

ScenarioConfig load_config_file(const std::string& path);

// Canonical JSON rendering; parse_config(render_config(c)) == c.
std::string render_config(const ScenarioConfig& config);

// Built-in defaults for each scenario.
ScenarioConfig default_config(Scenario scenario);

// Canonical one-line description of a field spec, used as TrajectoryRecord
// digest and in sidecar metadata.
std::string field_spec_digest(const FieldSpec& spec);

// Largest dt compatible with every active time-scale cap
// (tau_c/50, 1/rabi/50, tau_p/50, 1/gamma_t/50, tau_d/20).
double resolution_cap(const SystemParams& system, const FieldSpec& field);

}  // namespace vsim
