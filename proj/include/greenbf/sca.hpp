#pragma once

#include <functional>
#include <string>
#include <vector>

#include "greenbf/socp.hpp"
#include "greenbf/subproblems.hpp"
#include "greenbf/types.hpp"

namespace greenbf::sca {

/// The four benchmark designs. Joint* keep the smoothed RF term in the
/// objective; *FixedPA force the PA exponent to beta = 0. BfOnly* drop the
/// RF term from the optimization and report it as the constant N * p_rf.
enum class Scheme {
  JointNonlinear,
  JointFixedPA,
  BfOnlyNonlinear,
  BfOnlyFixedPA,
};

inline bool scheme_is_joint(Scheme s) {
  return s == Scheme::JointNonlinear || s == Scheme::JointFixedPA;
}
inline bool scheme_fixed_pa(Scheme s) {
  return s == Scheme::JointFixedPA || s == Scheme::BfOnlyFixedPA;
}

std::string scheme_name(Scheme s);
bool scheme_from_name(const std::string& name, Scheme& out);

struct ScaOptions {
  int max_iterations = 100;
  double rel_tol = 1e-6;       ///< relative change of the smoothed objective
  Scheme scheme = Scheme::JointNonlinear;
  double solver_tol = 1e-9;
  int solver_max_iter = 200;
  bool anneal_epsilon = false; ///< optional geometric schedule, eps/10 per stage
  int anneal_stages = 3;
};

enum class ScaStatus {
  Solved,      ///< converged or stopped with a feasible iterate
  Degraded,    ///< a mid-run solve failed; best previous iterate returned
  Infeasible,  ///< certified infeasible at initialization
  Failed,      ///< initialization produced no usable answer
};

enum class ScaTermination { Converged, MaxIterations, Stalled, None };

struct ScaIterationRecord {
  double surrogate_objective;  ///< surrogate value at this iterate (with constant)
  double smoothed_objective;   ///< scheme objective: pa + rf_smoothed (Joint*), pa (BfOnly*)
  double exact_objective;      ///< pa + indicator rf at the default threshold
  BeamformerSet w;
  Vector antenna_powers;
  int stage = 0;               ///< epsilon annealing stage
};

/// Called after every cone solve (initialization and subproblems) with the
/// problem and its solution; used by tests to audit KKT residuals.
using SubproblemObserver =
    std::function<void(const socp::ConeProblem&, const socp::ConeSolution&)>;

struct ScaTrace {
  ScaStatus status = ScaStatus::Failed;
  ScaTermination termination = ScaTermination::None;
  /// Record 0 is the initialization point; each further record is an adopted
  /// iterate. Within a stage the smoothed objective is non-increasing.
  std::vector<ScaIterationRecord> iterations;
  BeamformerSet final_w;
  Scheme scheme = Scheme::JointNonlinear;
  double beta_used = 0.0;
  double epsilon_used = 0.0;
  int sca_iterations = 0;      ///< subproblem solves after initialization
  int subproblem_solves = 0;   ///< total cone solves including initialization
};

/// Sequential convex approximation: start from the initialization minimizer,
/// iterate surrogate subproblems, adopt a minimizer only when it does not
/// increase the smoothed objective, stop on relative objective change or
/// iteration cap. Every recorded iterate is feasible for the original
/// constraints.
ScaTrace sca_solve(const Channel& channel, const SystemConfig& cfg,
                   const ScaOptions& opts,
                   const SubproblemObserver& observer = {});

/// Exact total power of the trace's final beamformers: true PA power, true
/// indicator RF power (constant N * p_rf for BfOnly*), plus static power.
/// This, not the surrogate value, is what experiments report.
PowerBreakdown evaluate_scheme(const ScaTrace& trace, const SystemConfig& cfg);

}  // namespace greenbf::sca
