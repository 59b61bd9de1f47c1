// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "vsim/fft.hpp"
#include "vsim/state.hpp"

namespace vsim {

// Train of Gaussian envelopes exp(-(t-t_j)^2/tau_p^2). The envelope itself is
// treated as the co-rotating complex amplitude; full width at half maximum of
// the envelope is 2*sqrt(ln 2)*tau_p.
struct PulseTrainSpec {
    double amplitude_scale = 1.0;
    double tau_p = 10.0;                       // fs
    std::vector<double> centers = {250.0, 750.0};

    bool operator==(const PulseTrainSpec&) const = default;
};

// Constant drive; detuning_from_midpoint rotates the sampled envelope as
// exp(-i*d*t) relative to the frame at the level midpoint.
struct CwSpec {
    double amplitude_scale = 1.0;
    double detuning_from_midpoint = 0.0;       // rad/fs

    bool operator==(const CwSpec&) const = default;
};

enum class NoiseCoupling { Shared, IndependentPerPulse };

// Gaussian pulse train multiplied by a stationary complex circular Gaussian
// process xi(t) with <xi(t')xi*(t'')> = exp(-(t''-t')^2/(2*tau_d^2)),
// <xi xi> = 0, <|xi|^2> = 1. Ensemble statistics of realizations reproduce
//   <eps(t')eps*(t'')> = eps0^2 env(t') env(t'') e^{i w0 (t''-t')}
//                        e^{-(t''-t')^2/(2 tau_d^2)}
// per pulse window. With Shared coupling one process runs through all pulses;
// IndependentPerPulse gives each pulse its own process.
struct NoisyPulseSpec {
    double amplitude_scale = 1.0;
    double tau_p = 100.0;                      // fs, envelope width
    double tau_d = 10.0;                       // fs, decorrelation time
    std::vector<double> centers = {50.0, 550.0};
    double carrier_offset = 0.0;               // rad/fs, w0 relative to the frame
    NoiseCoupling coupling = NoiseCoupling::Shared;

    bool operator==(const NoisyPulseSpec&) const = default;
};

using FieldSpec = std::variant<PulseTrainSpec, CwSpec, NoisyPulseSpec>;

// Drive amplitude tabulated on the simulation grid. Deterministic fields carry
// an exact evaluator for off-grid times; stochastic realizations fall back to
// cubic interpolation of the samples.
struct SampledField {
    TimeGrid grid;
    std::vector<Complex> values;               // one per grid sample
    std::optional<std::uint64_t> seed;         // present for stochastic realizations
    std::function<Complex(double)> exact;      // null for stochastic fields

    const Complex& at_grid(std::size_t k) const { return values[k]; }

    // Field value at arbitrary t inside the grid (throws OutOfGrid otherwise).
    Complex value_at(double t) const;
};

SampledField eval_pulse_train(const PulseTrainSpec& spec, const TimeGrid& grid);
SampledField eval_cw(const CwSpec& spec, const TimeGrid& grid);

// Stationary unit-variance complex circular Gaussian process over the grid
// with the Gaussian decorrelation kernel of width tau_d. Exposed so the
// synthesized statistics can be probed directly.
std::vector<Complex> synthesize_stationary_noise(const TimeGrid& grid, double tau_d,
                                                 std::uint64_t seed);

// Reusable sampler for one (spec, grid): precomputes the envelope, the kernel
// spectrum, and the FFT plan. realization() is const and thread-safe.
class NoiseModel {
  public:
    NoiseModel(const NoisyPulseSpec& spec, const TimeGrid& grid);

    SampledField realization(std::uint64_t seed) const;

    const TimeGrid& grid() const { return grid_; }
    const std::vector<double>& envelope() const { return envelope_; }

    // Ensemble expectation of eps(t_k) eps*(t_l) for this model.
    Complex expected_correlation(std::size_t k, std::size_t l) const;

  private:
    std::vector<Complex> stationary_noise(std::uint64_t seed) const;

    NoisyPulseSpec spec_;
    TimeGrid grid_;
    std::vector<double> envelope_;               // shared-mode envelope (sum over pulses)
    std::vector<std::vector<double>> per_pulse_; // per-pulse envelopes (independent mode)
    fft::Radix2Plan plan_;
    std::vector<double> spectrum_amp_;           // sqrt(circulant eigenvalues) * sqrt(M)
};

SampledField synthesize_noisy_pulse(const NoisyPulseSpec& spec, const TimeGrid& grid,
                                    std::uint64_t seed);

struct CorrelationEstimate {
    Complex mean;
    double std_error;  // of the complex mean: sqrt((Var Re + Var Im)/n)
};

using IndexPair = std::pair<std::size_t, std::size_t>;

// Sample mean of eps(t_k) conj(eps(t_l)) over an ensemble of realizations,
// with its standard error. All realizations must share one grid. The streaming
// overload avoids materializing the ensemble; `make` must be pure in `index`.
// Accumulation uses fixed-index blocks with compensated summation, so the
// result is independent of thread count.
std::vector<CorrelationEstimate> estimate_two_time_correlation(
    const std::function<SampledField(std::size_t)>& make, std::size_t n_realizations,
    const std::vector<IndexPair>& pairs, int n_threads = 1);

std::vector<CorrelationEstimate> estimate_two_time_correlation(
    const std::vector<SampledField>& realizations, const std::vector<IndexPair>& pairs);

}  // namespace vsim
