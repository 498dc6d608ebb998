#pragma once

#include "greenbf/socp.hpp"
#include "greenbf/types.hpp"

namespace greenbf::subproblems {

/// Index map between complex beamformer entries and the flat real variable
/// vector used by the cone problems. Re(w_{k,n}) sits at 2(k*N + n), the
/// imaginary part right after it, and the per-antenna power epigraph
/// variable t_n at 2KN + n.
struct LiftedLayout {
  int n_antennas = 0;
  int n_users = 0;

  int re_index(int k, int n) const { return 2 * (k * n_antennas + n); }
  int im_index(int k, int n) const { return re_index(k, n) + 1; }
  int t_index(int n) const { return 2 * n_antennas * n_users + n; }
  int n_vars() const { return 2 * n_antennas * n_users + n_antennas; }
};

/// Stack w into a flat real vector per the layout. Epigraph coordinates are
/// filled with the per-antenna powers, so the result is the natural feasible
/// lift of w.
Eigen::VectorXd lift(const BeamformerSet& w, const LiftedLayout& layout);

/// Read the beamformers back out of a flat vector (epigraph entries ignored).
BeamformerSet unlift(const Eigen::VectorXd& z, const LiftedLayout& layout);

/// A stack of (G, h) rows plus the cone blocks they belong to, used to
/// compose problems from independent constraint groups.
struct ConstraintRows {
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  socp::ConeSpec cones;

  void append(const ConstraintRows& other);
};

/// One second-order cone per user k, dimension 2(K-1)+2:
///   || [Re(h_k^H w_i), Im(h_k^H w_i) for i != k; sigma] || <=
///   (1/sqrt(Gamma_k)) Re(h_k^H w_k).
/// The imaginary part of h_k^H w_k is left free; the cone is equivalent to
/// the SINR constraint up to a phase rotation of w_k.
ConstraintRows build_sinr_cones(const Channel& channel, const SystemConfig& cfg,
                                const LiftedLayout& layout);

/// Per-antenna epigraphs t_n >= sum_k |w_{k,n}|^2 written as the cones
/// ||(2 w_{:,n}, t_n - 1)|| <= t_n + 1, plus the nonnegative rows
/// t_n <= P_n^max and sum_n t_n <= P_t.
ConstraintRows build_power_epigraphs(const SystemConfig& cfg,
                                     const LiftedLayout& layout);

/// Feasibility/initialization problem: minimize sum_n t_n over the SINR
/// cones and power constraints. Optimal status certifies feasibility of the
/// original design problem and the minimizer is used as the SCA starting
/// point; PrimalInfeasible certifies infeasibility.
socp::ConeProblem build_init_problem(const Channel& channel,
                                     const SystemConfig& cfg);

/// Linearized objective pieces of the SCA subproblem at a given anchor.
/// alpha holds the PA surrogate slopes, rho the RF surrogate slopes (zero
/// when the RF term is excluded), constant the offset that has to be added
/// back to the solver objective to recover the surrogate value.
struct SubproblemCoefficients {
  Vector alpha;
  Vector rho;
  double constant = 0.0;
};

struct ScaSubproblem {
  socp::ConeProblem problem;
  SubproblemCoefficients coeffs;
  LiftedLayout layout;
};

/// Convex subproblem for one SCA iteration: minimize
/// sum_n (alpha_n + rho_n) t_n subject to the same cones as the init
/// problem. The optimal value plus coeffs.constant equals the surrogate
/// objective at the minimizer.
ScaSubproblem build_sca_subproblem(const Channel& channel,
                                   const SystemConfig& cfg,
                                   const BeamformerSet& anchor,
                                   bool include_rf_surrogate = true);

}  // namespace greenbf::subproblems
