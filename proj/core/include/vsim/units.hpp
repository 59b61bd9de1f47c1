// Copyright (c) 2026 vsim developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <numbers>

// Unit conventions, in one place.
//
// Internal units: time in femtoseconds, angular frequencies in rad/fs,
// rates in 1/fs. Every "THz"/"GHz" value appearing in configs or presets
// is an ordinary frequency f and converts as omega = 2*pi*f. Level
// splittings may equivalently be given as a period tau_c with
// omega = 2*pi/tau_c, and sink rates as a sink time Ts with gamma = 1/Ts.

namespace vsim::units {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 1 THz ordinary frequency = 2*pi*1e-3 rad/fs.
constexpr double angular_from_thz(double f_thz) { return kTwoPi * f_thz * 1e-3; }
constexpr double thz_from_angular(double w) { return w / (kTwoPi * 1e-3); }

constexpr double angular_from_ghz(double f_ghz) { return kTwoPi * f_ghz * 1e-6; }

// Excited-state splitting <-> period tau_c = 2*pi/omega.
constexpr double splitting_from_period(double tau_c_fs) { return kTwoPi / tau_c_fs; }
constexpr double period_from_splitting(double omega) { return kTwoPi / omega; }

// Sink rate <-> sink time Ts = 1/gamma.
constexpr double rate_from_time(double t_fs) { return 1.0 / t_fs; }
constexpr double time_from_rate(double gamma) { return 1.0 / gamma; }

}  // namespace vsim::units
