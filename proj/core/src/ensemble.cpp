// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#include "vsim/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <thread>

#include "vsim/observables.hpp"
#include "vsim/rng.hpp"

namespace vsim {

namespace {

// Per-sample running sums for one block of realizations.
enum Field : std::size_t {
    kGg, k11, k22, kTt, kRe12, kIm12, kRe1g, kIm1g, kRe2g, kIm2g,
    kRe12Sq, kIm12Sq, kCSum, kCCount, kFieldCount
};

struct BlockSums {
    std::vector<double> data;  // n_samples * kFieldCount, zero initialized

    explicit BlockSums(std::size_t n_samples) : data(n_samples * kFieldCount, 0.0) {}
    BlockSums() = default;

    void accumulate(const TrajectoryRecord& rec) {
        const std::size_t n = rec.n_samples();
        for (std::size_t k = 0; k < n; ++k) {
            double* row = data.data() + k * kFieldCount;
            row[kGg] += rec.rho_gg[k];
            row[k11] += rec.rho_11[k];
            row[k22] += rec.rho_22[k];
            row[kTt] += rec.rho_tt[k];
            const double re = rec.rho_12[k].real();
            const double im = rec.rho_12[k].imag();
            row[kRe12] += re;
            row[kIm12] += im;
            row[kRe1g] += rec.rho_1g[k].real();
            row[kIm1g] += rec.rho_1g[k].imag();
            row[kRe2g] += rec.rho_2g[k].real();
            row[kIm2g] += rec.rho_2g[k].imag();
            row[kRe12Sq] += re * re;
            row[kIm12Sq] += im * im;
            if (!std::isnan(rec.C[k])) {
                row[kCSum] += rec.C[k];
                row[kCCount] += 1.0;
            }
        }
    }

    void add(const BlockSums& other) {
        for (std::size_t i = 0; i < data.size(); ++i) data[i] += other.data[i];
    }
};

}  // namespace

EnsembleResult run_ensemble(const SystemParams& params, const NoisyPulseSpec& field_spec,
                            const TimeGrid& grid, const EnsembleSpec& spec,
                            const EnsembleOptions& options, const SeedFn& seed_fn) {
    if (spec.n_realizations < 2) throw EmptyEnsemble("ensemble needs n_realizations >= 2");

    const NoiseModel model(field_spec, grid);
    const ScenarioRhs rhs = build_rhs(params);
    const DensityState initial = new_ground_state();
    const SeedFn seeds = seed_fn ? seed_fn : SeedFn([base = spec.base_seed](std::size_t k) {
        return rng::split_seed(base, k);
    });

    constexpr std::size_t kBlock = 32;
    const std::size_t n = spec.n_realizations;
    const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
    const std::size_t n_samples = grid.n_samples();

    std::vector<BlockSums> blocks(n_blocks);
    for (auto& b : blocks) b = BlockSums(n_samples);

    std::atomic<std::size_t> next_block{0};
    std::atomic<bool> failed{false};
    std::mutex failure_mutex;
    std::size_t failed_index = std::numeric_limits<std::size_t>::max();
    std::optional<InvariantViolation> failure;

    auto worker = [&]() {
        for (;;) {
            if (failed.load(std::memory_order_relaxed)) return;
            const std::size_t b = next_block.fetch_add(1);
            if (b >= n_blocks) return;
            const std::size_t begin = b * kBlock;
            const std::size_t end = std::min(begin + kBlock, n);
            for (std::size_t idx = begin; idx < end; ++idx) {
                try {
                    const SampledField field = model.realization(seeds(idx));
                    const TrajectoryRecord rec =
                        run_trajectory(rhs, field, initial, options.step);
                    blocks[b].accumulate(rec);
                } catch (const InvariantViolation& err) {
                    std::lock_guard lock(failure_mutex);
                    if (idx < failed_index) {
                        failed_index = idx;
                        failure = err;
                    }
                    failed.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        }
    };

    int threads = options.n_threads;
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
    if (failure) throw *failure;

    // Pairwise tree over block index: deterministic combination order.
    std::vector<BlockSums> level = std::move(blocks);
    while (level.size() > 1) {
        std::vector<BlockSums> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
            level[i].add(level[i + 1]);
            next.push_back(std::move(level[i]));
        }
        if (level.size() % 2 == 1) next.push_back(std::move(level.back()));
        level = std::move(next);
    }
    const BlockSums& total = level.front();

    EnsembleResult result;
    result.n_used = n;
    auto& mean = result.mean_record;
    mean.grid = grid;
    mean.params = params;
    mean.field_spec_digest = options.field_spec_digest;
    mean.rho_gg.resize(n_samples);
    mean.rho_11.resize(n_samples);
    mean.rho_22.resize(n_samples);
    mean.rho_tt.resize(n_samples);
    mean.rho_12.resize(n_samples);
    mean.rho_1g.resize(n_samples);
    mean.rho_2g.resize(n_samples);
    mean.C.resize(n_samples);
    result.stderr_re_rho12.resize(n_samples);
    result.stderr_im_rho12.resize(n_samples);
    result.stderr_rho12.resize(n_samples);
    if (spec.per_realization_measure) {
        result.mean_C_of_realizations.emplace(n_samples);
    }

    const auto dn = static_cast<double>(n);
    std::size_t peak_index = 0;
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double* row = total.data.data() + k * kFieldCount;
        mean.rho_gg[k] = row[kGg] / dn;
        mean.rho_11[k] = row[k11] / dn;
        mean.rho_22[k] = row[k22] / dn;
        mean.rho_tt[k] = row[kTt] / dn;
        const double mean_re = row[kRe12] / dn;
        const double mean_im = row[kIm12] / dn;
        mean.rho_12[k] = {mean_re, mean_im};
        mean.rho_1g[k] = {row[kRe1g] / dn, row[kIm1g] / dn};
        mean.rho_2g[k] = {row[kRe2g] / dn, row[kIm2g] / dn};
        const auto c = coherence_fraction(mean.rho_11[k], mean.rho_22[k], mean.rho_12[k]);
        mean.C[k] = c ? *c : std::numeric_limits<double>::quiet_NaN();

        const double var_re = std::max(0.0, (row[kRe12Sq] - dn * mean_re * mean_re) / (dn - 1.0));
        const double var_im = std::max(0.0, (row[kIm12Sq] - dn * mean_im * mean_im) / (dn - 1.0));
        result.stderr_re_rho12[k] = std::sqrt(var_re / dn);
        result.stderr_im_rho12[k] = std::sqrt(var_im / dn);
        result.stderr_rho12[k] = std::sqrt((var_re + var_im) / dn);

        if (result.mean_C_of_realizations) {
            (*result.mean_C_of_realizations)[k] =
                row[kCCount] > 0.0 ? row[kCSum] / row[kCCount]
                                   : std::numeric_limits<double>::quiet_NaN();
        }

        if (std::abs(mean.rho_12[k]) > std::abs(mean.rho_12[peak_index])) peak_index = k;
    }

    result.peak_abs_rho12 = std::abs(mean.rho_12[peak_index]);
    if (result.peak_abs_rho12 > 0.0) {
        result.achieved_rel_stderr = result.stderr_rho12[peak_index] / result.peak_abs_rho12;
    } else {
        result.achieved_rel_stderr =
            result.stderr_rho12[peak_index] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    result.converged = result.achieved_rel_stderr <= spec.convergence_target;
    return result;
}

ConvergenceReport convergence_report(const EnsembleResult& result, double target) {
    if (result.n_used < 2) throw EmptyEnsemble("convergence report needs n_used >= 2");
    ConvergenceReport report;
    report.achieved_rel_stderr = result.achieved_rel_stderr;
    report.target = target;
    report.n_used = result.n_used;
    report.converged = result.achieved_rel_stderr <= target;
    if (report.converged) {
        report.recommended_n = result.n_used;
    } else {
        const double ratio = result.achieved_rel_stderr / target;
        report.recommended_n = static_cast<std::size_t>(
            std::ceil(static_cast<double>(result.n_used) * ratio * ratio - 1e-9));
    }
    return report;
}

std::string ConvergenceReport::summary() const {
    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "relative stderr on peak |<rho_12>|: %.4g (target %.4g, n = %zu) -> %s; "
                  "recommended n = %zu",
                  achieved_rel_stderr, target, n_used,
                  converged ? "converged" : "not converged", recommended_n);
    return buf;
}

}  // namespace vsim
