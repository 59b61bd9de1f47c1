// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#include "vsim/observables.hpp"

#include <algorithm>
#include <cmath>

#include "vsim/dynamics.hpp"

namespace vsim {

std::optional<double> coherence_fraction(double rho11, double rho22, Complex rho12) {
    const double denom = rho11 + rho22;
    if (!(denom >= kCoherencePopulationFloor)) return std::nullopt;
    return std::abs(rho12) / denom;
}

double purity(const DensityState& state) {
    // Tr(rho^2) = sum_ij |rho_ij|^2 for Hermitian rho.
    return state.hermitized().m.squaredNorm();
}

double purity_from_record(const TrajectoryRecord& record, std::size_t k) {
    return purity(state_from_record(record, k));
}

namespace {

struct WindowSpan {
    std::size_t first;
    std::size_t last;  // inclusive
};

WindowSpan window_span(const TimeGrid& grid, const PulseWindow& w) {
    if (!(w.start < w.end)) throw EmptyWindow("window '" + w.label + "' has start >= end");
    const double lo = std::max(w.start, grid.t_start);
    const double hi = std::min(w.end, grid.t_end());
    if (!(lo <= hi)) throw EmptyWindow("window '" + w.label + "' lies outside the grid");
    const auto first = static_cast<std::size_t>(std::ceil((lo - grid.t_start) / grid.dt - 1e-9));
    const auto last = static_cast<std::size_t>(std::floor((hi - grid.t_start) / grid.dt + 1e-9));
    if (first > last || first >= grid.n_samples()) {
        throw EmptyWindow("window '" + w.label + "' contains no grid samples");
    }
    return {first, std::min(last, grid.n_samples() - 1)};
}

}  // namespace

double window_peak(const TrajectoryRecord& record, const PulseWindow& window,
                   ResurgenceQuantity quantity) {
    const WindowSpan span = window_span(record.grid, window);
    double peak = -1.0;
    bool any_defined = false;
    for (std::size_t k = span.first; k <= span.last; ++k) {
        const double v = quantity == ResurgenceQuantity::AbsRho12 ? std::abs(record.rho_12[k])
                                                                  : record.C[k];
        if (std::isnan(v)) continue;
        any_defined = true;
        peak = std::max(peak, v);
    }
    if (!any_defined) {
        throw AllSentinel("window '" + window.label + "' holds only undefined samples");
    }
    return peak;
}

double resurgence_gain(const TrajectoryRecord& record, const PulseWindow& w1,
                       const PulseWindow& w2, ResurgenceQuantity quantity) {
    const double peak1 = window_peak(record, w1, quantity);
    const double peak2 = window_peak(record, w2, quantity);
    return peak2 / peak1;
}

std::size_t count_bursts(const std::vector<double>& series, double floor_fraction,
                         double prominence_fraction) {
    const std::size_t n = series.size();
    std::vector<double> y(n);
    double global_peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = std::isnan(series[i]) ? 0.0 : series[i];
        global_peak = std::max(global_peak, y[i]);
    }
    if (global_peak <= 0.0) return 0;
    const double floor = floor_fraction * global_peak;

    std::size_t bursts = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (y[i] < floor) continue;
        if ((i > 0 && y[i] < y[i - 1]) || (i + 1 < n && y[i] <= y[i + 1])) continue;

        // Valley floor on the path to the nearest strictly higher terrain on
        // each side; prominence is the rise above the deeper of the two.
        double left_valley = y[i];
        bool left_higher = false;
        for (std::size_t j = i; j-- > 0;) {
            left_valley = std::min(left_valley, y[j]);
            if (y[j] > y[i]) {
                left_higher = true;
                break;
            }
        }
        double right_valley = y[i];
        bool right_higher = false;
        for (std::size_t j = i + 1; j < n; ++j) {
            right_valley = std::min(right_valley, y[j]);
            if (y[j] > y[i]) {
                right_higher = true;
                break;
            }
        }
        double prominence = y[i];
        if (left_higher && right_higher) {
            // Escape route over the shallower valley decides distinctness.
            prominence = y[i] - std::max(left_valley, right_valley);
        } else if (left_higher) {
            prominence = y[i] - left_valley;
        } else if (right_higher) {
            prominence = y[i] - right_valley;
        }
        if (prominence >= prominence_fraction * y[i]) ++bursts;
    }
    return bursts;
}

}  // namespace vsim
