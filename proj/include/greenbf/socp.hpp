#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace greenbf::socp {

enum class ConeKind { NonNeg, SecondOrder };

/// One block of the slack cone. NonNeg holds `size` independent nonnegative
/// rows; SecondOrder is a single cone of dimension `size` (>= 1) whose first
/// coordinate bounds the Euclidean norm of the rest.
struct ConeBlock {
  ConeKind kind = ConeKind::NonNeg;
  int size = 0;
};

struct ConeSpec {
  std::vector<ConeBlock> blocks;

  int total_dim() const;
  /// Barrier degree: nonneg rows count 1 each, every SOC block counts 1.
  int degree() const;
  void validate() const;
};

/// Standard-form conic program
///   minimize    c'x
///   subject to  A x = b
///               G x + s = h,  s in K
/// where K is the product cone described by `cones`. The equality block may
/// be empty (0 x n).
struct ConeProblem {
  Eigen::VectorXd c;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  ConeSpec cones;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;

  int n_vars() const { return static_cast<int>(c.size()); }
  int n_cone_rows() const { return static_cast<int>(G.rows()); }
  int n_eqs() const { return static_cast<int>(A.rows()); }
  void validate() const;
};

enum class SolveStatus {
  Optimal,
  PrimalInfeasible,
  DualInfeasible,
  MaxIterations,
  NumericalFailure,
};

struct Residuals {
  double primal = std::numeric_limits<double>::quiet_NaN();
  double dual = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
};

/// Solver output. Contents by status:
///  - Optimal: x/s primal pair, (y,z) duals, objective = c'x, residuals are
///    the solver's scaled-space convergence measures (all <= tol).
///  - PrimalInfeasible: (y,z) is a Farkas ray with z in the dual cone,
///    normalized to h'z + b'y = -1; residuals.dual holds the recomputed
///    certificate violation ||G'z + A'y||_inf.
///  - DualInfeasible: x is an unbounded improving ray normalized to c'x = -1
///    with G x + s = 0, A x = 0; residuals.primal holds the recomputed ray
///    violation.
///  - MaxIterations: best iterate reached, residuals above tolerance.
///  - NumericalFailure: no usable result; caller must treat as "no solution",
///    never as infeasibility.
struct ConeSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  Eigen::VectorXd s;
  Eigen::VectorXd z;
  Eigen::VectorXd y;
  double objective = std::numeric_limits<double>::quiet_NaN();
  Residuals residuals;
  int iterations = 0;
};

/// Dense primal-dual interior-point solver on the homogeneous self-dual
/// embedding, with Nesterov-Todd scaling and a Mehrotra-style
/// predictor-corrector. Deterministic: identical problems give bit-identical
/// solutions.
ConeSolution solve_socp(const ConeProblem& p, double tol = 1e-8,
                        int max_iter = 200);

/// Max violation of membership of s in the cone (0 when inside). SOC and
/// NonNeg cones are self-dual, so the same measure serves for dual vectors.
double cone_violation(const ConeSpec& cones, const Eigen::VectorXd& s);

/// Optimality measures recomputed from scratch, trusting nothing the solver
/// reported:
///   primal = max(||Gx + s - h||_inf, ||Ax - b||_inf, cone violation of s)
///   dual   = max(||c + G'z + A'y||_inf, cone violation of z) / max(1, ||c||_inf)
///   gap    = |c'x + b'y + h'z| / max(1, |c'x|)
Residuals kkt_residuals(const ConeProblem& p, const ConeSolution& sol);

}  // namespace greenbf::socp
