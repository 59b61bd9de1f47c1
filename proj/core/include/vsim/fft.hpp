// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

// Minimal iterative radix-2 FFT. Sizes here are a few thousand points,
// and noise synthesis must be bit-reproducible across threads, so a
// self-contained transform with a precomputable plan is all we need.

namespace vsim::fft {

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

constexpr std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Precomputed bit-reversal permutation and twiddle factors for size n.
class Radix2Plan {
  public:
    explicit Radix2Plan(std::size_t n) : n_(n) {
        if (!is_power_of_two(n)) throw std::invalid_argument("Radix2Plan: size must be a power of two");
        bitrev_.resize(n);
        std::size_t log2n = 0;
        while ((std::size_t{1} << log2n) < n) ++log2n;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
            bitrev_[i] = r;
        }
        twiddle_.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            twiddle_[k] = {std::cos(angle), std::sin(angle)};
        }
    }

    std::size_t size() const { return n_; }

    // In-place DFT: X[m] = sum_j x[j] e^{-2pi i jm/n}.
    void forward(std::vector<std::complex<double>>& data) const { run(data, false); }

    // In-place inverse DFT with 1/n normalization.
    void inverse(std::vector<std::complex<double>>& data) const {
        run(data, true);
        const double scale = 1.0 / static_cast<double>(n_);
        for (auto& v : data) v *= scale;
    }

  private:
    void run(std::vector<std::complex<double>>& data, bool inverse) const {
        if (data.size() != n_) throw std::invalid_argument("Radix2Plan: data size mismatch");
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t j = bitrev_[i];
            if (i < j) std::swap(data[i], data[j]);
        }
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t half = len >> 1;
            const std::size_t stride = n_ / len;
            for (std::size_t start = 0; start < n_; start += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    std::complex<double> w = twiddle_[k * stride];
                    if (inverse) w = std::conj(w);
                    const auto even = data[start + k];
                    const auto odd = data[start + k + half] * w;
                    data[start + k] = even + odd;
                    data[start + k + half] = even - odd;
                }
            }
        }
    }

    std::size_t n_;
    std::vector<std::size_t> bitrev_;
    std::vector<std::complex<double>> twiddle_;
};

}  // namespace vsim::fft
