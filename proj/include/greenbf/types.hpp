#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace greenbf {

using Complex = std::complex<double>;
using CxMatrix = Eigen::MatrixXcd;
using CxVector = Eigen::VectorXcd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Physical parameters of the downlink system. All powers are in watts and
/// SINR targets in linear scale; dB/dBm conversions happen only at the config
/// parsing boundary.
struct SystemConfig {
  int n_antennas = 0;      ///< N (figure captions call it M)
  int n_users = 0;         ///< K
  Vector sinr_targets;     ///< per-user SINR floors, linear, all > 0
  double p_antenna_max = 0.0;  ///< per-antenna output power cap, W
  double p_sum_max = 0.0;      ///< sum transmit power cap, W
  double eta_max = 0.0;        ///< peak PA efficiency, in (0,1]
  double beta = 0.0;           ///< PA efficiency exponent, in [0,1]
  double p_rf = 0.0;           ///< per-chain RF power when on, W
  double p_static = 0.0;       ///< static power, W
  double sigma2 = 0.0;         ///< noise power, W
  double epsilon = 0.0;        ///< indicator smoothing width, W

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;

  /// Antenna counts as "on" when its output power exceeds this. Solvers
  /// return tiny nonzeros, never exact zeros.
  double on_threshold() const { return 1e-6 * p_antenna_max; }

  /// Floor applied to anchor powers before raising to a negative exponent
  /// in the PA surrogate.
  double gradient_floor() const { return 1e-8 * p_antenna_max; }

  /// Copy with a different antenna count (used when restricting arrays).
  SystemConfig with_antennas(int n) const {
    SystemConfig c = *this;
    c.n_antennas = n;
    return c;
  }
};

/// K x N complex channel matrix; row k holds h_k^H.
struct Channel {
  CxMatrix entries;

  int n_users() const { return static_cast<int>(entries.rows()); }
  int n_antennas() const { return static_cast<int>(entries.cols()); }

  /// Throws if dimensions disagree with cfg or entries are not finite.
  void validate(const SystemConfig& cfg) const;

  /// Channel restricted to a subset of antenna columns (kept in order).
  Channel restrict_antennas(const std::vector<int>& antennas) const;
};

/// K beamforming vectors of length N, stored as columns of an N x K matrix.
struct BeamformerSet {
  CxMatrix vectors;

  int n_antennas() const { return static_cast<int>(vectors.rows()); }
  int n_users() const { return static_cast<int>(vectors.cols()); }

  static BeamformerSet zero(int n_antennas, int n_users) {
    return BeamformerSet{CxMatrix::Zero(n_antennas, n_users)};
  }

  /// P_n^out = sum_k |w_{k,n}|^2.
  double per_antenna_power(int n) const { return vectors.row(n).squaredNorm(); }

  Vector per_antenna_powers() const {
    Vector p(vectors.rows());
    for (int n = 0; n < vectors.rows(); ++n) p(n) = per_antenna_power(n);
    return p;
  }

  /// Total transmit power sum_k ||w_k||^2.
  double sum_power() const { return vectors.squaredNorm(); }

  bool is_finite() const { return vectors.allFinite(); }
};

/// Exact decomposition of the base-station power draw. total is the exact
/// sum of the three components by construction.
struct PowerBreakdown {
  double pa = 0.0;
  double rf = 0.0;
  double static_power = 0.0;
  double total = 0.0;
};

inline PowerBreakdown make_breakdown(double pa, double rf, double static_power) {
  return PowerBreakdown{pa, rf, static_power, pa + rf + static_power};
}

}  // namespace greenbf
