#include "greenbf/sca.hpp"

#include <cmath>

#include "greenbf/power_model.hpp"

namespace greenbf::sca {

using subproblems::build_init_problem;
using subproblems::build_sca_subproblem;
using subproblems::LiftedLayout;
using subproblems::unlift;

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::JointNonlinear: return "joint_nonlinear";
    case Scheme::JointFixedPA: return "joint_fixed_pa";
    case Scheme::BfOnlyNonlinear: return "bf_only_nonlinear";
    case Scheme::BfOnlyFixedPA: return "bf_only_fixed_pa";
  }
  return "unknown";
}

bool scheme_from_name(const std::string& name, Scheme& out) {
  for (Scheme s : {Scheme::JointNonlinear, Scheme::JointFixedPA,
                   Scheme::BfOnlyNonlinear, Scheme::BfOnlyFixedPA}) {
    if (scheme_name(s) == name) {
      out = s;
      return true;
    }
  }
  return false;
}

namespace {

double smoothed_objective(const Vector& powers, const SystemConfig& cfg,
                          bool joint) {
  double f = pa_power(powers, cfg);
  if (joint) f += rf_power_smoothed(powers, cfg);
  return f;
}

ScaIterationRecord make_record(const BeamformerSet& w, double surrogate,
                               const SystemConfig& cfg, bool joint, int stage) {
  ScaIterationRecord rec;
  rec.w = w;
  rec.antenna_powers = w.per_antenna_powers();
  rec.surrogate_objective = surrogate;
  rec.smoothed_objective = smoothed_objective(rec.antenna_powers, cfg, joint);
  rec.exact_objective = pa_power(rec.antenna_powers, cfg) +
                        rf_power_exact(w, cfg, cfg.on_threshold());
  rec.stage = stage;
  return rec;
}

}  // namespace

ScaTrace sca_solve(const Channel& channel, const SystemConfig& cfg,
                   const ScaOptions& opts, const SubproblemObserver& observer) {
  SystemConfig run_cfg = cfg;
  if (scheme_fixed_pa(opts.scheme)) run_cfg.beta = 0.0;
  run_cfg.validate();
  channel.validate(run_cfg);
  const bool joint = scheme_is_joint(opts.scheme);
  const LiftedLayout layout{run_cfg.n_antennas, run_cfg.n_users};

  ScaTrace trace;
  trace.scheme = opts.scheme;
  trace.beta_used = run_cfg.beta;
  trace.epsilon_used = run_cfg.epsilon;

  const socp::ConeProblem init = build_init_problem(channel, run_cfg);
  const socp::ConeSolution init_sol =
      socp::solve_socp(init, opts.solver_tol, opts.solver_max_iter);
  ++trace.subproblem_solves;
  if (observer) observer(init, init_sol);

  if (init_sol.status == socp::SolveStatus::PrimalInfeasible) {
    trace.status = ScaStatus::Infeasible;
    return trace;
  }
  if (init_sol.status != socp::SolveStatus::Optimal) {
    trace.status = ScaStatus::Failed;
    return trace;
  }

  BeamformerSet anchor = unlift(init_sol.x, layout);
  double f_anchor =
      smoothed_objective(anchor.per_antenna_powers(), run_cfg, joint);
  trace.iterations.push_back(make_record(anchor, f_anchor, run_cfg, joint, 0));

  trace.status = ScaStatus::Solved;
  trace.termination = ScaTermination::MaxIterations;

  const int stages = opts.anneal_epsilon ? std::max(1, opts.anneal_stages) : 1;
  for (int stage = 0; stage < stages; ++stage) {
    if (stage > 0) {
      run_cfg.epsilon /= 10.0;
      trace.epsilon_used = run_cfg.epsilon;
      // The smoothed objective is epsilon-dependent; reset the baseline.
      f_anchor = smoothed_objective(anchor.per_antenna_powers(), run_cfg, joint);
    }
    trace.termination = ScaTermination::MaxIterations;

    for (int j = 0; j < opts.max_iterations; ++j) {
      const subproblems::ScaSubproblem sub =
          build_sca_subproblem(channel, run_cfg, anchor, joint);
      const socp::ConeSolution sol =
          socp::solve_socp(sub.problem, opts.solver_tol, opts.solver_max_iter);
      ++trace.subproblem_solves;
      ++trace.sca_iterations;
      if (observer) observer(sub.problem, sol);

      if (sol.status != socp::SolveStatus::Optimal) {
        trace.status = ScaStatus::Degraded;
        trace.termination = ScaTermination::Stalled;
        break;
      }

      const double surrogate_new = sol.objective + sub.coeffs.constant;
      // The surrogate is tangent at the anchor, so its anchor value equals
      // f_anchor; a minimizer above that (beyond solver wobble) means the
      // subproblem solve went backwards.
      if (surrogate_new > f_anchor + 1e-7 * std::max(1.0, std::abs(f_anchor))) {
        trace.termination = ScaTermination::Stalled;
        break;
      }

      const BeamformerSet w_new = unlift(sol.x, layout);
      const double f_new =
          smoothed_objective(w_new.per_antenna_powers(), run_cfg, joint);
      const bool adopt =
          f_new <= f_anchor + 1e-12 * std::max(1.0, std::abs(f_anchor));
      const bool converged =
          std::abs(f_new - f_anchor) <= opts.rel_tol * std::max(1.0, std::abs(f_anchor));
      if (adopt) {
        anchor = w_new;
        f_anchor = f_new;
        trace.iterations.push_back(
            make_record(anchor, surrogate_new, run_cfg, joint, stage));
      }
      if (converged) {
        trace.termination = ScaTermination::Converged;
        break;
      }
      if (!adopt) {
        trace.termination = ScaTermination::Stalled;
        break;
      }
    }
    if (trace.status == ScaStatus::Degraded) break;
  }

  trace.final_w = anchor;
  return trace;
}

PowerBreakdown evaluate_scheme(const ScaTrace& trace, const SystemConfig& cfg) {
  // PA power is evaluated under cfg.beta as given: the caller decides which
  // efficiency model to measure against, independent of the scheme's design
  // assumption. BfOnly* schemes pay every RF chain by convention.
  const bool joint = scheme_is_joint(trace.scheme);
  const double pa = pa_power(trace.final_w, cfg);
  const double rf = joint ? rf_power_exact(trace.final_w, cfg, cfg.on_threshold())
                          : cfg.p_rf * trace.final_w.n_antennas();
  return make_breakdown(pa, rf, cfg.p_static);
}

}  // namespace greenbf::sca
