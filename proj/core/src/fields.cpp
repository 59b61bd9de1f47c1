// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#include "vsim/fields.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "vsim/rng.hpp"

namespace vsim {

namespace {

double gaussian_envelope(double t, double tau_p, const std::vector<double>& centers) {
    double env = 0.0;
    for (const double c : centers) {
        const double u = (t - c) / tau_p;
        env += std::exp(-u * u);
    }
    return env;
}

void check_centers(const std::vector<double>& centers) {
    if (centers.empty()) throw InvalidSpec("pulse spec: at least one center required");
    for (std::size_t i = 1; i < centers.size(); ++i) {
        if (!(centers[i] > centers[i - 1]))
            throw InvalidSpec("pulse spec: centers must be strictly increasing");
    }
}

void check_coverage(const TimeGrid& grid, const std::vector<double>& centers, double tau_p) {
    const double lo = centers.front() - 5.0 * tau_p;
    const double hi = centers.back() + 5.0 * tau_p;
    if (grid.t_start > lo + 1e-9 || grid.t_end() < hi - 1e-9) {
        throw GridTooShort("grid must cover [first center - 5 tau_p, last center + 5 tau_p]");
    }
}

// Circulant-embedding spectrum of the stationary Gaussian kernel: sqrt of the
// eigenvalues of the periodized covariance, scaled so that an inverse FFT of
// amp[j]*z_j (z iid circular normal) has covariance exp(-lag^2/(2 tau_d^2)).
std::vector<double> kernel_spectrum_amp(const fft::Radix2Plan& plan, double dt, double tau_d) {
    const std::size_t m = plan.size();
    std::vector<Complex> kernel(m);
    const double inv_two_tau_d2 = 1.0 / (2.0 * tau_d * tau_d);
    for (std::size_t j = 0; j < m; ++j) {
        const double lag = static_cast<double>(std::min(j, m - j)) * dt;
        kernel[j] = std::exp(-lag * lag * inv_two_tau_d2);
    }
    plan.forward(kernel);
    std::vector<double> amp(m);
    for (std::size_t j = 0; j < m; ++j) {
        amp[j] = std::sqrt(std::max(kernel[j].real(), 0.0) * static_cast<double>(m));
    }
    return amp;
}

std::vector<Complex> sample_stationary(const fft::Radix2Plan& plan,
                                       const std::vector<double>& amp, std::size_t n_out,
                                       std::uint64_t seed) {
    const std::size_t m = plan.size();
    rng::Xoshiro256pp gen(seed);
    std::vector<Complex> buf(m);
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    for (std::size_t j = 0; j < m; ++j) {
        const auto [a, b] = rng::normal_pair(gen);
        buf[j] = amp[j] * Complex{a * inv_sqrt2, b * inv_sqrt2};
    }
    plan.inverse(buf);
    buf.resize(n_out);
    return buf;
}

// Padding keeps the periodic wrap-around below exp(-50) of the kernel peak
// when tau_d is small against the grid span. For tau_d of the order of the
// span or larger the process is near fully correlated and a short period is
// both sufficient and more accurate, so the padding is capped.
std::size_t padded_fft_size(std::size_t n_samples, double dt, double tau_d) {
    const double span = static_cast<double>(n_samples) * dt;
    const double pad_time = std::min(10.0 * tau_d, 2.0 * span);
    const std::size_t pad = static_cast<std::size_t>(std::ceil(pad_time / dt)) + 1;
    return fft::next_power_of_two(n_samples + pad);
}

}  // namespace

Complex SampledField::value_at(double t) const {
    if (!grid.contains(t)) throw OutOfGrid("field evaluation outside the sampled grid");
    if (exact) return exact(t);

    const double u = (t - grid.t_start) / grid.dt;
    const auto nearest = static_cast<std::size_t>(std::llround(std::max(u, 0.0)));
    if (nearest < values.size() && std::abs(u - static_cast<double>(nearest)) < 1e-9) {
        return values[nearest];
    }

    const std::size_t n = values.size();
    if (n < 4) {
        // Degenerate short grid: linear interpolation.
        const auto i = std::min(static_cast<std::size_t>(u), n - 2);
        const double x = u - static_cast<double>(i);
        return values[i] * (1.0 - x) + values[i + 1] * x;
    }

    // Cubic Lagrange interpolation on the 4-point stencil around t.
    auto i = static_cast<std::size_t>(u);
    if (i >= n - 1) i = n - 2;
    const std::size_t base = std::min(i > 0 ? i - 1 : 0, n - 4);
    const double w = u - static_cast<double>(base);
    const double l0 = -(w - 1.0) * (w - 2.0) * (w - 3.0) / 6.0;
    const double l1 = w * (w - 2.0) * (w - 3.0) / 2.0;
    const double l2 = -w * (w - 1.0) * (w - 3.0) / 2.0;
    const double l3 = w * (w - 1.0) * (w - 2.0) / 6.0;
    return values[base] * l0 + values[base + 1] * l1 + values[base + 2] * l2 +
           values[base + 3] * l3;
}

SampledField eval_pulse_train(const PulseTrainSpec& spec, const TimeGrid& grid) {
    if (!(spec.tau_p > 0.0)) throw InvalidSpec("pulse_train.tau_p must be positive");
    check_centers(spec.centers);
    if (grid.dt > spec.tau_p / 50.0) {
        throw GridTooCoarse("pulse_train requires dt <= tau_p/50");
    }
    check_coverage(grid, spec.centers, spec.tau_p);

    SampledField field;
    field.grid = grid;
    field.values.resize(grid.n_samples());
    for (std::size_t k = 0; k < field.values.size(); ++k) {
        field.values[k] = spec.amplitude_scale *
                          gaussian_envelope(grid.time(k), spec.tau_p, spec.centers);
    }
    field.exact = [spec](double t) -> Complex {
        return spec.amplitude_scale * gaussian_envelope(t, spec.tau_p, spec.centers);
    };
    return field;
}

SampledField eval_cw(const CwSpec& spec, const TimeGrid& grid) {
    SampledField field;
    field.grid = grid;
    field.values.resize(grid.n_samples());
    const double d = spec.detuning_from_midpoint;
    for (std::size_t k = 0; k < field.values.size(); ++k) {
        field.values[k] = d == 0.0 ? Complex{spec.amplitude_scale, 0.0}
                                   : spec.amplitude_scale * std::polar(1.0, -d * grid.time(k));
    }
    field.exact = [amp = spec.amplitude_scale, d](double t) -> Complex {
        return d == 0.0 ? Complex{amp, 0.0} : amp * std::polar(1.0, -d * t);
    };
    return field;
}

NoiseModel::NoiseModel(const NoisyPulseSpec& spec, const TimeGrid& grid)
    : spec_(spec), grid_(grid), plan_(1) {
    if (!(spec.tau_p > 0.0)) throw InvalidSpec("noisy_pulse.tau_p must be positive");
    if (!(spec.tau_d > 0.0)) throw InvalidSpec("noisy_pulse.tau_d must be positive");
    check_centers(spec.centers);
    if (grid.dt > spec.tau_d / 20.0 || grid.dt > spec.tau_p / 50.0) {
        throw GridTooCoarse("noisy_pulse requires dt <= min(tau_d/20, tau_p/50)");
    }
    check_coverage(grid, spec.centers, spec.tau_p);

    const std::size_t n = grid.n_samples();
    envelope_.resize(n);
    per_pulse_.assign(spec.centers.size(), std::vector<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const double t = grid.time(k);
        double sum = 0.0;
        for (std::size_t p = 0; p < spec.centers.size(); ++p) {
            const double u = (t - spec.centers[p]) / spec.tau_p;
            const double e = std::exp(-u * u);
            per_pulse_[p][k] = e;
            sum += e;
        }
        envelope_[k] = sum;
    }

    plan_ = fft::Radix2Plan(padded_fft_size(n, grid.dt, spec.tau_d));
    spectrum_amp_ = kernel_spectrum_amp(plan_, grid.dt, spec.tau_d);
}

std::vector<Complex> NoiseModel::stationary_noise(std::uint64_t seed) const {
    return sample_stationary(plan_, spectrum_amp_, grid_.n_samples(), seed);
}

SampledField NoiseModel::realization(std::uint64_t seed) const {
    const std::size_t n = grid_.n_samples();
    SampledField field;
    field.grid = grid_;
    field.seed = seed;
    field.values.assign(n, Complex{0.0, 0.0});

    if (spec_.coupling == NoiseCoupling::Shared) {
        const auto xi = stationary_noise(seed);
        for (std::size_t k = 0; k < n; ++k) {
            field.values[k] = spec_.amplitude_scale * envelope_[k] * xi[k];
        }
    } else {
        for (std::size_t p = 0; p < spec_.centers.size(); ++p) {
            const auto xi = stationary_noise(rng::split_seed(seed, p));
            for (std::size_t k = 0; k < n; ++k) {
                field.values[k] += spec_.amplitude_scale * per_pulse_[p][k] * xi[k];
            }
        }
    }

    if (spec_.carrier_offset != 0.0) {
        for (std::size_t k = 0; k < n; ++k) {
            field.values[k] *= std::polar(1.0, -spec_.carrier_offset * grid_.time(k));
        }
    }
    return field;
}

Complex NoiseModel::expected_correlation(std::size_t k, std::size_t l) const {
    const double t1 = grid_.time(k);
    const double t2 = grid_.time(l);
    double env_product = 0.0;
    if (spec_.coupling == NoiseCoupling::Shared) {
        env_product = envelope_[k] * envelope_[l];
    } else {
        for (const auto& env : per_pulse_) env_product += env[k] * env[l];
    }
    const double lag = t2 - t1;
    const double kernel = std::exp(-lag * lag / (2.0 * spec_.tau_d * spec_.tau_d));
    const Complex phase = std::polar(1.0, spec_.carrier_offset * lag);
    return spec_.amplitude_scale * spec_.amplitude_scale * env_product * kernel * phase;
}

std::vector<Complex> synthesize_stationary_noise(const TimeGrid& grid, double tau_d,
                                                 std::uint64_t seed) {
    if (!(tau_d > 0.0)) throw InvalidSpec("stationary noise: tau_d must be positive");
    if (grid.dt > tau_d / 20.0) throw GridTooCoarse("stationary noise requires dt <= tau_d/20");
    const fft::Radix2Plan plan(padded_fft_size(grid.n_samples(), grid.dt, tau_d));
    const auto amp = kernel_spectrum_amp(plan, grid.dt, tau_d);
    return sample_stationary(plan, amp, grid.n_samples(), seed);
}

std::vector<CorrelationEstimate> estimate_two_time_correlation(
    const std::function<SampledField(std::size_t)>& make, std::size_t n_realizations,
    const std::vector<IndexPair>& pairs, int n_threads) {
    if (n_realizations < 2) throw EmptyEnsemble("correlation estimate needs >= 2 realizations");

    const SampledField reference = make(0);
    const std::size_t n_samples = reference.grid.n_samples();
    for (const auto& [k, l] : pairs) {
        if (k >= n_samples || l >= n_samples)
            throw OutOfGrid("correlation pair index outside the grid");
    }

    struct Kahan {
        double sum = 0.0;
        double carry = 0.0;
        void add(double x) {
            const double y = x - carry;
            const double t = sum + y;
            carry = (t - sum) - y;
            sum = t;
        }
        double total() const { return sum + carry; }
    };
    struct PairAccum {
        Kahan re, im, re2, im2;
    };

    constexpr std::size_t kBlock = 64;
    const std::size_t n_blocks = (n_realizations + kBlock - 1) / kBlock;
    std::vector<std::vector<PairAccum>> block_acc(n_blocks,
                                                  std::vector<PairAccum>(pairs.size()));

    std::atomic<std::size_t> next_block{0};
    std::atomic<bool> mismatch{false};
    auto worker = [&]() {
        for (;;) {
            const std::size_t b = next_block.fetch_add(1);
            if (b >= n_blocks) return;
            const std::size_t begin = b * kBlock;
            const std::size_t end = std::min(begin + kBlock, n_realizations);
            for (std::size_t idx = begin; idx < end; ++idx) {
                const SampledField field = make(idx);
                if (!(field.grid == reference.grid)) {
                    mismatch.store(true);
                    return;
                }
                for (std::size_t p = 0; p < pairs.size(); ++p) {
                    const Complex prod =
                        field.values[pairs[p].first] * std::conj(field.values[pairs[p].second]);
                    auto& acc = block_acc[b][p];
                    acc.re.add(prod.real());
                    acc.im.add(prod.imag());
                    acc.re2.add(prod.real() * prod.real());
                    acc.im2.add(prod.imag() * prod.imag());
                }
            }
        }
    };

    int threads = n_threads;
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(n_blocks)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (mismatch.load()) throw GridMismatch("correlation estimate: realizations on different grids");

    // Fixed pairwise tree over block index keeps the reduction order
    // independent of the thread schedule.
    struct Totals {
        double re = 0.0, im = 0.0, re2 = 0.0, im2 = 0.0;
    };
    std::vector<std::vector<Totals>> level(n_blocks, std::vector<Totals>(pairs.size()));
    for (std::size_t b = 0; b < n_blocks; ++b) {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            level[b][p] = {block_acc[b][p].re.total(), block_acc[b][p].im.total(),
                           block_acc[b][p].re2.total(), block_acc[b][p].im2.total()};
        }
    }
    while (level.size() > 1) {
        std::vector<std::vector<Totals>> next((level.size() + 1) / 2,
                                              std::vector<Totals>(pairs.size()));
        for (std::size_t i = 0; i < next.size(); ++i) {
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                Totals t = level[2 * i][p];
                if (2 * i + 1 < level.size()) {
                    const Totals& u = level[2 * i + 1][p];
                    t.re += u.re;
                    t.im += u.im;
                    t.re2 += u.re2;
                    t.im2 += u.im2;
                }
                next[i][p] = t;
            }
        }
        level = std::move(next);
    }

    const auto n = static_cast<double>(n_realizations);
    std::vector<CorrelationEstimate> out(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const Totals& t = level[0][p];
        const double mean_re = t.re / n;
        const double mean_im = t.im / n;
        const double var_re = std::max(0.0, (t.re2 - n * mean_re * mean_re) / (n - 1.0));
        const double var_im = std::max(0.0, (t.im2 - n * mean_im * mean_im) / (n - 1.0));
        out[p] = {Complex{mean_re, mean_im}, std::sqrt((var_re + var_im) / n)};
    }
    return out;
}

std::vector<CorrelationEstimate> estimate_two_time_correlation(
    const std::vector<SampledField>& realizations, const std::vector<IndexPair>& pairs) {
    if (realizations.size() < 2) throw EmptyEnsemble("correlation estimate needs >= 2 realizations");
    return estimate_two_time_correlation(
        [&](std::size_t i) { return realizations[i]; }, realizations.size(), pairs, 1);
}

SampledField synthesize_noisy_pulse(const NoisyPulseSpec& spec, const TimeGrid& grid,
                                    std::uint64_t seed) {
    return NoiseModel(spec, grid).realization(seed);
}

}  // namespace vsim
