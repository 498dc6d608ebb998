// Shared test-only oracles, independent of the implementation paths they
// check.
#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "greenbf/socp.hpp"
#include "greenbf/types.hpp"

namespace greenbf::testing {

/// Direct evaluation of the SINR formula with explicit scalar loops (no
/// shared code with the library's sinr()).
inline double direct_sinr(const Channel& channel, const BeamformerSet& w,
                          int k, double sigma2) {
  const int n_users = static_cast<int>(channel.entries.rows());
  const int n_antennas = static_cast<int>(channel.entries.cols());
  double numerator = 0.0;
  double interference = 0.0;
  for (int i = 0; i < n_users; ++i) {
    std::complex<double> gain(0.0, 0.0);
    for (int n = 0; n < n_antennas; ++n)
      gain += channel.entries(k, n) * w.vectors(n, i);
    const double mag = gain.real() * gain.real() + gain.imag() * gain.imag();
    if (i == k)
      numerator = mag;
    else
      interference += mag;
  }
  return numerator / (interference + sigma2);
}

/// Baseline system config for unit tests: normalized noise and unit-variance
/// channels, paper PA/RF constants.
inline SystemConfig normalized_config(int n_antennas, int n_users,
                                      double gamma_linear) {
  SystemConfig cfg;
  cfg.n_antennas = n_antennas;
  cfg.n_users = n_users;
  cfg.sinr_targets = Vector::Constant(n_users, gamma_linear);
  cfg.p_antenna_max = 1.5;
  cfg.p_sum_max = 39.810717055349734;  // 46 dBm
  cfg.eta_max = 0.38;
  cfg.beta = 0.5;
  cfg.p_rf = 0.35;
  cfg.p_static = 20.0;
  cfg.sigma2 = 1.0;
  cfg.epsilon = 1.5e-4;
  return cfg;
}

/// Paper-scale config: 46 dBm cap, -174 dBm/Hz noise over 20 MHz.
inline SystemConfig paper_config(int n_antennas, int n_users,
                                 double gamma_linear) {
  SystemConfig cfg = normalized_config(n_antennas, n_users, gamma_linear);
  cfg.sigma2 = 7.962143411069942e-14;
  return cfg;
}

/// Channel gain making one full-power antenna see a 20 dB SNR.
inline double default_pathloss(const SystemConfig& cfg) {
  return 100.0 * cfg.sigma2 / cfg.p_sum_max;
}

inline BeamformerSet random_beamformers(std::mt19937_64& eng, int n_antennas,
                                        int n_users, double amplitude = 1.0) {
  std::normal_distribution<double> dist(0.0, amplitude);
  BeamformerSet w = BeamformerSet::zero(n_antennas, n_users);
  for (int n = 0; n < n_antennas; ++n)
    for (int k = 0; k < n_users; ++k)
      w.vectors(n, k) = Complex(dist(eng), dist(eng));
  return w;
}

// ---------------------------------------------------------------------------
// Random feasible SOCP instances with strictly feasible primal/dual pairs by
// construction, so Optimal is the only correct outcome.
// ---------------------------------------------------------------------------

inline socp::ConeProblem random_feasible_socp(std::mt19937_64& eng, int n_vars,
                                              const socp::ConeSpec& cones,
                                              int n_eqs = 0) {
  std::normal_distribution<double> dist(0.0, 1.0);
  const int m = cones.total_dim();

  socp::ConeProblem p;
  p.cones = cones;
  p.G.resize(m, n_vars);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n_vars; ++j) p.G(i, j) = dist(eng);

  Eigen::VectorXd x0(n_vars);
  for (int j = 0; j < n_vars; ++j) x0(j) = dist(eng);

  auto interior_point = [&](Eigen::VectorXd& v) {
    int off = 0;
    for (const socp::ConeBlock& b : cones.blocks) {
      if (b.kind == socp::ConeKind::NonNeg) {
        for (int i = 0; i < b.size; ++i) v(off + i) = 0.5 + std::abs(dist(eng));
      } else {
        double norm1 = 0.0;
        for (int i = 1; i < b.size; ++i) {
          v(off + i) = dist(eng);
          norm1 += v(off + i) * v(off + i);
        }
        v(off) = std::sqrt(norm1) + 0.5 + std::abs(dist(eng));
      }
      off += b.size;
    }
  };

  Eigen::VectorXd s0(m), z0(m);
  interior_point(s0);
  interior_point(z0);
  p.h = p.G * x0 + s0;

  if (n_eqs > 0) {
    p.A.resize(n_eqs, n_vars);
    for (int i = 0; i < n_eqs; ++i)
      for (int j = 0; j < n_vars; ++j) p.A(i, j) = dist(eng);
    p.b = p.A * x0;
    Eigen::VectorXd y0(n_eqs);
    for (int i = 0; i < n_eqs; ++i) y0(i) = dist(eng);
    p.c = -p.G.transpose() * z0 - p.A.transpose() * y0;
  } else {
    p.A.resize(0, n_vars);
    p.b.resize(0);
    p.c = -p.G.transpose() * z0;
  }
  return p;
}

/// Grid-refinement minimizer for tiny cone problems (n_vars <= 3): scans a
/// box, keeps the best feasible grid point, shrinks the box around it, and
/// repeats. Independent of the interior-point path entirely.
inline double grid_refine_min(const socp::ConeProblem& p, double box_half_width,
                              int rounds = 9, int points_per_dim = 21) {
  const int n = p.n_vars();
  Eigen::VectorXd center = Eigen::VectorXd::Zero(n);
  double width = box_half_width;
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x = center;

  for (int round = 0; round < rounds; ++round) {
    std::vector<int> idx(n, 0);
    const int total = static_cast<int>(std::pow(points_per_dim, n));
    for (int flat = 0; flat < total; ++flat) {
      Eigen::VectorXd x(n);
      int rem = flat;
      for (int d = 0; d < n; ++d) {
        const int i = rem % points_per_dim;
        rem /= points_per_dim;
        x(d) = center(d) + width * (2.0 * i / (points_per_dim - 1) - 1.0);
      }
      const Eigen::VectorXd s = p.h - p.G * x;
      if (socp::cone_violation(p.cones, s) > 1e-9) continue;
      const double obj = p.c.dot(x);
      if (obj < best) {
        best = obj;
        best_x = x;
      }
    }
    center = best_x;
    width *= 0.25;
  }
  return best;
}

}  // namespace greenbf::testing
