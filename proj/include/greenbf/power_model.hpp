#pragma once

#include "greenbf/types.hpp"

namespace greenbf {

/// SINR at user k: |h_k^H w_k|^2 / (sum_{i != k} |h_k^H w_i|^2 + sigma2).
/// Throws on out-of-range k or non-finite inputs.
double sinr(const Channel& channel, const BeamformerSet& w, int k, double sigma2);

/// PA draw for a vector of per-antenna output powers:
///   (1/eta_max) * sum_n (P_n^max)^beta * (P_n^out)^(1-beta),
/// with an unpowered PA (P_n^out = 0) contributing exactly zero for every
/// beta, including beta = 1.
double pa_power(const Vector& antenna_powers, const SystemConfig& cfg);
double pa_power(const BeamformerSet& w, const SystemConfig& cfg);

/// Smoothed on/off indicator log(1 + x/eps) / log(1 + 1/eps). The argument
/// is raw per-antenna power in watts; eps fixes where the "on" knee sits.
/// Throws on x < 0 or eps <= 0.
double indicator_approx(double x, double eps);

/// RF chain power with the true indicator: p_rf * #{n : P_n^out > on_threshold}.
double rf_power_exact(const BeamformerSet& w, const SystemConfig& cfg,
                      double on_threshold);

/// RF chain power under the smoothed indicator at cfg.epsilon.
double rf_power_smoothed(const Vector& antenna_powers, const SystemConfig& cfg);
double rf_power_smoothed(const BeamformerSet& w, const SystemConfig& cfg);

/// Exact total draw: PA + indicator RF + static.
PowerBreakdown total_power(const BeamformerSet& w, const SystemConfig& cfg,
                           double on_threshold);

/// First-order expansion of pa_power around anchor per-antenna powers.
/// Dominates pa_power whenever all anchor powers are positive; tangent at
/// the anchor. Anchor powers are floored at cfg.gradient_floor() before
/// being raised to the -beta power.
double pa_surrogate(const Vector& antenna_powers, const Vector& anchor_powers,
                    const SystemConfig& cfg);
double pa_surrogate(const BeamformerSet& w, const BeamformerSet& anchor,
                    const SystemConfig& cfg);

/// First-order expansion of rf_power_smoothed around anchor per-antenna
/// powers; dominates it everywhere and is tangent at the anchor.
double rf_surrogate(const Vector& antenna_powers, const Vector& anchor_powers,
                    const SystemConfig& cfg);
double rf_surrogate(const BeamformerSet& w, const BeamformerSet& anchor,
                    const SystemConfig& cfg);

/// Per-antenna linearization coefficients shared by the surrogates and the
/// SCA subproblem objective. For anchor power tb (floored copy tf):
///   PA slope       alpha_n = (1-beta) (P_n^max)^beta / eta_max * tf^(-beta)
///   PA offset      (P_n^max)^beta / eta_max * (tb^(1-beta) - alpha_n'*tb)
///   RF slope       rho_n   = p_rf / (log(1+1/eps) * (tb + eps))
///   RF offset      p_rf/log(1+1/eps) * (log(1+tb/eps) - tb/(tb+eps))
struct LinearizedTerm {
  double slope = 0.0;
  double offset = 0.0;
};
LinearizedTerm pa_linearization(double anchor_power, const SystemConfig& cfg);
LinearizedTerm rf_linearization(double anchor_power, const SystemConfig& cfg);

}  // namespace greenbf
