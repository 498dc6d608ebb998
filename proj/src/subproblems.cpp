#include "greenbf/subproblems.hpp"

#include <cmath>
#include <stdexcept>

#include "greenbf/power_model.hpp"

namespace greenbf::subproblems {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd lift(const BeamformerSet& w, const LiftedLayout& layout) {
  if (w.n_antennas() != layout.n_antennas || w.n_users() != layout.n_users)
    throw std::invalid_argument("lift: beamformer/layout mismatch");
  VectorXd z = VectorXd::Zero(layout.n_vars());
  for (int k = 0; k < layout.n_users; ++k) {
    for (int n = 0; n < layout.n_antennas; ++n) {
      z(layout.re_index(k, n)) = w.vectors(n, k).real();
      z(layout.im_index(k, n)) = w.vectors(n, k).imag();
    }
  }
  for (int n = 0; n < layout.n_antennas; ++n)
    z(layout.t_index(n)) = w.per_antenna_power(n);
  return z;
}

BeamformerSet unlift(const VectorXd& z, const LiftedLayout& layout) {
  if (z.size() != layout.n_vars())
    throw std::invalid_argument("unlift: vector/layout mismatch");
  BeamformerSet w = BeamformerSet::zero(layout.n_antennas, layout.n_users);
  for (int k = 0; k < layout.n_users; ++k)
    for (int n = 0; n < layout.n_antennas; ++n)
      w.vectors(n, k) = Complex(z(layout.re_index(k, n)), z(layout.im_index(k, n)));
  return w;
}

void ConstraintRows::append(const ConstraintRows& other) {
  if (G.size() == 0) {
    *this = other;
    return;
  }
  if (other.G.size() == 0) return;
  const Eigen::Index rows = G.rows() + other.G.rows();
  MatrixXd g(rows, G.cols());
  g << G, other.G;
  VectorXd hh(rows);
  hh << h, other.h;
  G = std::move(g);
  h = std::move(hh);
  cones.blocks.insert(cones.blocks.end(), other.cones.blocks.begin(),
                      other.cones.blocks.end());
}

ConstraintRows build_sinr_cones(const Channel& channel, const SystemConfig& cfg,
                                const LiftedLayout& layout) {
  channel.validate(cfg);
  const int K = cfg.n_users;
  const int N = cfg.n_antennas;
  const int dim = 2 * (K - 1) + 2;
  const double sigma = std::sqrt(cfg.sigma2);

  ConstraintRows out;
  out.G = MatrixXd::Zero(static_cast<Eigen::Index>(K) * dim, layout.n_vars());
  out.h = VectorXd::Zero(static_cast<Eigen::Index>(K) * dim);

  int row = 0;
  for (int k = 0; k < K; ++k) {
    const double inv_sqrt_gamma = 1.0 / std::sqrt(cfg.sinr_targets(k));
    // Head: (1/sqrt(Gamma_k)) Re(h_k^H w_k). Channel row k already holds
    // h_k^H, so Re(h_k^H w_i) = a*u - b*v and Im = a*v + b*u for entry a+ib.
    for (int n = 0; n < N; ++n) {
      const double a = channel.entries(k, n).real();
      const double b = channel.entries(k, n).imag();
      out.G(row, layout.re_index(k, n)) = -inv_sqrt_gamma * a;
      out.G(row, layout.im_index(k, n)) = inv_sqrt_gamma * b;
    }
    ++row;
    for (int i = 0; i < K; ++i) {
      if (i == k) continue;
      for (int n = 0; n < N; ++n) {
        const double a = channel.entries(k, n).real();
        const double b = channel.entries(k, n).imag();
        out.G(row, layout.re_index(i, n)) = -a;      // Re(h_k^H w_i)
        out.G(row, layout.im_index(i, n)) = b;
        out.G(row + 1, layout.re_index(i, n)) = -b;  // Im(h_k^H w_i)
        out.G(row + 1, layout.im_index(i, n)) = -a;
      }
      row += 2;
    }
    out.h(row) = sigma;
    ++row;
    out.cones.blocks.push_back({socp::ConeKind::SecondOrder, dim});
  }
  return out;
}

ConstraintRows build_power_epigraphs(const SystemConfig& cfg,
                                     const LiftedLayout& layout) {
  const int K = cfg.n_users;
  const int N = cfg.n_antennas;
  const int soc_dim = 2 * K + 2;

  ConstraintRows out;
  const Eigen::Index rows = N + 1 + static_cast<Eigen::Index>(N) * soc_dim;
  out.G = MatrixXd::Zero(rows, layout.n_vars());
  out.h = VectorXd::Zero(rows);

  // Caps: t_n <= P_n^max and sum_n t_n <= P_t.
  int row = 0;
  for (int n = 0; n < N; ++n, ++row) {
    out.G(row, layout.t_index(n)) = 1.0;
    out.h(row) = cfg.p_antenna_max;
  }
  for (int n = 0; n < N; ++n) out.G(row, layout.t_index(n)) = 1.0;
  out.h(row) = cfg.p_sum_max;
  ++row;
  out.cones.blocks.push_back({socp::ConeKind::NonNeg, N + 1});

  // Epigraphs t_n >= sum_k |w_{k,n}|^2 via ||(2x, t-1)|| <= t+1.
  for (int n = 0; n < N; ++n) {
    out.G(row, layout.t_index(n)) = -1.0;
    out.h(row) = 1.0;
    ++row;
    for (int k = 0; k < K; ++k) {
      out.G(row, layout.re_index(k, n)) = -2.0;
      ++row;
      out.G(row, layout.im_index(k, n)) = -2.0;
      ++row;
    }
    out.G(row, layout.t_index(n)) = -1.0;
    out.h(row) = -1.0;
    ++row;
    out.cones.blocks.push_back({socp::ConeKind::SecondOrder, soc_dim});
  }
  return out;
}

namespace {

socp::ConeProblem compose(const Channel& channel, const SystemConfig& cfg,
                          const VectorXd& t_weights) {
  const LiftedLayout layout{cfg.n_antennas, cfg.n_users};
  ConstraintRows rows = build_power_epigraphs(cfg, layout);
  rows.append(build_sinr_cones(channel, cfg, layout));

  socp::ConeProblem p;
  p.c = VectorXd::Zero(layout.n_vars());
  for (int n = 0; n < cfg.n_antennas; ++n) p.c(layout.t_index(n)) = t_weights(n);
  p.G = std::move(rows.G);
  p.h = std::move(rows.h);
  p.cones = std::move(rows.cones);
  p.A.resize(0, layout.n_vars());
  p.b.resize(0);
  return p;
}

}  // namespace

socp::ConeProblem build_init_problem(const Channel& channel,
                                     const SystemConfig& cfg) {
  cfg.validate();
  return compose(channel, cfg, VectorXd::Ones(cfg.n_antennas));
}

ScaSubproblem build_sca_subproblem(const Channel& channel,
                                   const SystemConfig& cfg,
                                   const BeamformerSet& anchor,
                                   bool include_rf_surrogate) {
  cfg.validate();
  if (anchor.n_antennas() != cfg.n_antennas || anchor.n_users() != cfg.n_users)
    throw std::invalid_argument("anchor dimensions do not match config");

  const int N = cfg.n_antennas;
  ScaSubproblem sub;
  sub.layout = LiftedLayout{cfg.n_antennas, cfg.n_users};
  sub.coeffs.alpha = VectorXd::Zero(N);
  sub.coeffs.rho = VectorXd::Zero(N);
  sub.coeffs.constant = 0.0;

  VectorXd weights = VectorXd::Zero(N);
  for (int n = 0; n < N; ++n) {
    const double tb = anchor.per_antenna_power(n);
    const LinearizedTerm pa = pa_linearization(tb, cfg);
    sub.coeffs.alpha(n) = pa.slope;
    sub.coeffs.constant += pa.offset;
    weights(n) = pa.slope;
    if (include_rf_surrogate) {
      const LinearizedTerm rf = rf_linearization(tb, cfg);
      sub.coeffs.rho(n) = rf.slope;
      sub.coeffs.constant += rf.offset;
      weights(n) += rf.slope;
    }
  }
  sub.problem = compose(channel, cfg, weights);
  return sub;
}

}  // namespace greenbf::subproblems
