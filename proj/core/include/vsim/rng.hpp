// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

// Deterministic random numbers with documented stream splitting.
//
// All stochastic sampling in this library draws from xoshiro256++ engines
// whose 256-bit state is expanded from a 64-bit seed with splitmix64.
// Parallel streams are derived, never advanced-and-shared:
//
//   stream seed for substream k of base seed s:
//       split_seed(s, k) = mix64(s + (k + 1) * 0x9E3779B97F4A7C15)
//
// where mix64 is the splitmix64 output function. Ensemble realization k
// uses split_seed(base_seed, k); a realization that needs per-pulse
// independent noise splits its own seed again by pulse index. Normal
// deviates come from an explicit Box-Muller transform so that sequences
// are identical across compilers and standard libraries. Results are
// therefore bit-reproducible for a given (seed, draw order), independent
// of thread count.

namespace vsim::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 output function (Steele, Lea, Flood).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += kGolden;
    return mix64(state);
}

// Seed of substream `index` of `base`. Distinct indices give decorrelated
// streams; index 0 is not the base stream itself.
constexpr std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(base + (index + 1) * kGolden);
}

// xoshiro256++ (Blackman, Vigna). State seeded via splitmix64 expansion.
class Xoshiro256pp {
  public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in (0, 1]; never returns 0 so log() is safe.
    double uniform_unit() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

// One Box-Muller pair of independent standard normal deviates.
inline std::pair<double, double> normal_pair(Xoshiro256pp& gen) {
    const double u1 = gen.uniform_unit();
    const double u2 = gen.uniform_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace vsim::rng
