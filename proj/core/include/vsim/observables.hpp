// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "vsim/state.hpp"

namespace vsim {

struct TrajectoryRecord;

// Denominator floor below which the coherence fraction is undefined.
inline constexpr double kCoherencePopulationFloor = 1e-15;

// C = |rho_12| / (rho_11 + rho_22); nullopt when the excited population is
// below the floor. Phase of rho_12 is irrelevant; C <= 1/2 on positive states.
std::optional<double> coherence_fraction(double rho11, double rho22, Complex rho12);

// Tr(rho^2), in [1/4, 1] for valid states.
double purity(const DensityState& state);

// Purity of the state stored at sample k of a record.
double purity_from_record(const TrajectoryRecord& record, std::size_t k);

// Half-open in time is not needed; samples with start <= t <= end belong to
// the window.
struct PulseWindow {
    double start;
    double end;
    std::string label;
};

enum class ResurgenceQuantity { AbsRho12, C };

// Peak of the quantity in w2 divided by its peak in w1, skipping undefined
// sentinel samples. Throws EmptyWindow if a window contains no grid samples
// and AllSentinel if every sample in it is undefined.
double resurgence_gain(const TrajectoryRecord& record, const PulseWindow& w1,
                       const PulseWindow& w2, ResurgenceQuantity quantity);

// Peak of the quantity within one window (same sentinel rules).
double window_peak(const TrajectoryRecord& record, const PulseWindow& window,
                   ResurgenceQuantity quantity);

// Number of distinct transient bursts in a non-negative series: local maxima
// at least floor_fraction of the global peak whose topographic prominence
// (height above the valley separating them from higher terrain) is at least
// prominence_fraction of their own height. One drive pulse shows up as one
// burst even when the second response is much weaker than the first.
std::size_t count_bursts(const std::vector<double>& series, double floor_fraction = 0.01,
                         double prominence_fraction = 0.3);

}  // namespace vsim
