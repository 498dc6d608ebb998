#pragma once

#include <cmath>
#include <cstdint>

#include "greenbf/types.hpp"

namespace greenbf::bench {

/// SplitMix64-based mixing of a base seed with up to three stream indices.
/// Fixed for reproducibility; changing it would invalidate recorded seeds.
uint64_t mix_seed(uint64_t base, uint64_t a, uint64_t b, uint64_t c);

/// ChannelGen v1 (fixed algorithm, do not change):
///   engine   std::mt19937_64(seed)
///   order    row-major, user k outer, antenna n inner
///   uniforms u = ((x >> 11) + 1) * 2^-53 from consecutive engine draws
///   entry    sqrt(pathloss_scale/2) * (g1 + i g2), Box-Muller
///            g1 = sqrt(-2 ln u1) cos(2 pi u2), g2 = sqrt(-2 ln u1) sin(2 pi u2)
/// Entries are i.i.d. circularly-symmetric complex Gaussian with per-entry
/// variance pathloss_scale.
Channel gen_channel(uint64_t seed, int n_users, int n_antennas,
                    double pathloss_scale);

/// sigma^2 in watts: 10^((psd_dbm_per_hz + 10 log10(bandwidth_hz) - 30)/10).
double noise_power(double psd_dbm_per_hz, double bandwidth_hz);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

}  // namespace greenbf::bench
