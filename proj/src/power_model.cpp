#include "greenbf/power_model.hpp"

#include <cmath>
#include <stdexcept>

namespace greenbf {

void SystemConfig::validate() const {
  if (n_antennas <= 0) throw std::invalid_argument("n_antennas must be positive");
  if (n_users <= 0) throw std::invalid_argument("n_users must be positive");
  if (sinr_targets.size() != n_users)
    throw std::invalid_argument("sinr_targets size must equal n_users");
  if ((sinr_targets.array() <= 0.0).any())
    throw std::invalid_argument("sinr_targets must all be > 0");
  if (!(p_antenna_max > 0.0))
    throw std::invalid_argument("p_antenna_max must be > 0");
  if (p_sum_max < 0.0) throw std::invalid_argument("p_sum_max must be >= 0");
  if (!(eta_max > 0.0 && eta_max <= 1.0))
    throw std::invalid_argument("eta_max must be in (0,1]");
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("beta must be in [0,1]");
  if (p_rf < 0.0) throw std::invalid_argument("p_rf must be >= 0");
  if (p_static < 0.0) throw std::invalid_argument("p_static must be >= 0");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
}

void Channel::validate(const SystemConfig& cfg) const {
  if (n_users() != cfg.n_users || n_antennas() != cfg.n_antennas)
    throw std::invalid_argument("channel dimensions do not match config");
  if (!entries.allFinite())
    throw std::invalid_argument("channel entries must be finite");
}

Channel Channel::restrict_antennas(const std::vector<int>& antennas) const {
  CxMatrix sub(entries.rows(), static_cast<Eigen::Index>(antennas.size()));
  for (size_t j = 0; j < antennas.size(); ++j) sub.col(j) = entries.col(antennas[j]);
  return Channel{std::move(sub)};
}

double sinr(const Channel& channel, const BeamformerSet& w, int k, double sigma2) {
  const int n_users = channel.n_users();
  if (k < 0 || k >= n_users) throw std::invalid_argument("user index out of range");
  if (w.n_users() != n_users || w.n_antennas() != channel.n_antennas())
    throw std::invalid_argument("beamformer dimensions do not match channel");
  if (!channel.entries.allFinite() || !w.is_finite())
    throw std::invalid_argument("non-finite entries");

  // Row k of the channel already holds h_k^H, so a plain product gives h_k^H w_i.
  const CxVector gains = channel.entries.row(k) * w.vectors;
  double interference = 0.0;
  for (int i = 0; i < n_users; ++i)
    if (i != k) interference += std::norm(gains(i));
  return std::norm(gains(k)) / (interference + sigma2);
}

double pa_power(const Vector& antenna_powers, const SystemConfig& cfg) {
  double total = 0.0;
  for (int n = 0; n < antenna_powers.size(); ++n) {
    const double p = antenna_powers(n);
    if (p <= 0.0) continue;  // unpowered PA draws nothing, for every beta
    total += std::pow(cfg.p_antenna_max, cfg.beta) * std::pow(p, 1.0 - cfg.beta);
  }
  return total / cfg.eta_max;
}

double pa_power(const BeamformerSet& w, const SystemConfig& cfg) {
  return pa_power(w.per_antenna_powers(), cfg);
}

double indicator_approx(double x, double eps) {
  if (x < 0.0) throw std::invalid_argument("indicator_approx: x must be >= 0");
  if (!(eps > 0.0)) throw std::invalid_argument("indicator_approx: eps must be > 0");
  return std::log1p(x / eps) / std::log1p(1.0 / eps);
}

double rf_power_exact(const BeamformerSet& w, const SystemConfig& cfg,
                      double on_threshold) {
  int active = 0;
  for (int n = 0; n < w.n_antennas(); ++n)
    if (w.per_antenna_power(n) > on_threshold) ++active;
  return cfg.p_rf * active;
}

double rf_power_smoothed(const Vector& antenna_powers, const SystemConfig& cfg) {
  double sum = 0.0;
  for (int n = 0; n < antenna_powers.size(); ++n)
    sum += indicator_approx(std::max(antenna_powers(n), 0.0), cfg.epsilon);
  return cfg.p_rf * sum;
}

double rf_power_smoothed(const BeamformerSet& w, const SystemConfig& cfg) {
  return rf_power_smoothed(w.per_antenna_powers(), cfg);
}

PowerBreakdown total_power(const BeamformerSet& w, const SystemConfig& cfg,
                           double on_threshold) {
  return make_breakdown(pa_power(w, cfg), rf_power_exact(w, cfg, on_threshold),
                        cfg.p_static);
}

LinearizedTerm pa_linearization(double anchor_power, const SystemConfig& cfg) {
  const double tb = std::max(anchor_power, 0.0);
  const double tf = std::max(tb, cfg.gradient_floor());
  const double scale = std::pow(cfg.p_antenna_max, cfg.beta) / cfg.eta_max;
  const double slope = scale * (1.0 - cfg.beta) * std::pow(tf, -cfg.beta);
  // tb^(1-beta) with the PA-off convention at tb = 0 (covers beta = 1 too).
  const double value = tb > 0.0 ? scale * std::pow(tb, 1.0 - cfg.beta) : 0.0;
  return LinearizedTerm{slope, value - slope * tb};
}

LinearizedTerm rf_linearization(double anchor_power, const SystemConfig& cfg) {
  const double tb = std::max(anchor_power, 0.0);
  const double scale = cfg.p_rf / std::log1p(1.0 / cfg.epsilon);
  const double slope = scale / (tb + cfg.epsilon);
  const double value = scale * std::log1p(tb / cfg.epsilon);
  return LinearizedTerm{slope, value - slope * tb};
}

double pa_surrogate(const Vector& antenna_powers, const Vector& anchor_powers,
                    const SystemConfig& cfg) {
  double total = 0.0;
  for (int n = 0; n < antenna_powers.size(); ++n) {
    const LinearizedTerm lin = pa_linearization(anchor_powers(n), cfg);
    total += lin.slope * antenna_powers(n) + lin.offset;
  }
  return total;
}

double pa_surrogate(const BeamformerSet& w, const BeamformerSet& anchor,
                    const SystemConfig& cfg) {
  return pa_surrogate(w.per_antenna_powers(), anchor.per_antenna_powers(), cfg);
}

double rf_surrogate(const Vector& antenna_powers, const Vector& anchor_powers,
                    const SystemConfig& cfg) {
  double total = 0.0;
  for (int n = 0; n < antenna_powers.size(); ++n) {
    const LinearizedTerm lin = rf_linearization(anchor_powers(n), cfg);
    total += lin.slope * antenna_powers(n) + lin.offset;
  }
  return total;
}

double rf_surrogate(const BeamformerSet& w, const BeamformerSet& anchor,
                    const SystemConfig& cfg) {
  return rf_surrogate(w.per_antenna_powers(), anchor.per_antenna_powers(), cfg);
}

}  // namespace greenbf
