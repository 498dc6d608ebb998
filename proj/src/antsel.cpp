#include "greenbf/antsel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "greenbf/power_model.hpp"

namespace greenbf::antsel {

namespace {

constexpr double kTieTol = 1e-9;

/// Design-time power model: *FixedPA schemes believe beta = 0 when comparing
/// candidates.
SystemConfig design_cfg(const SystemConfig& cfg, sca::Scheme scheme) {
  SystemConfig c = cfg;
  if (sca::scheme_fixed_pa(scheme)) c.beta = 0.0;
  return c;
}

BeamformerSet embed(const BeamformerSet& sub, const std::vector<int>& active,
                    int n_antennas) {
  BeamformerSet full = BeamformerSet::zero(n_antennas, sub.n_users());
  for (size_t i = 0; i < active.size(); ++i)
    full.vectors.row(active[i]) = sub.vectors.row(static_cast<int>(i));
  return full;
}

struct SubsetRun {
  sca::ScaTrace trace;
  BeamformerSet full_w;  // embedded into the full array
  PowerBreakdown breakdown;
};

/// Re-solve the design on the given antenna subset and price the result with
/// the exact indicator RF cost over the active antennas.
bool run_subset(const Channel& channel, const SystemConfig& cfg,
                const sca::ScaOptions& opts, const std::vector<int>& active,
                const sca::SubproblemObserver& observer, SubsetRun& out) {
  const Channel sub_channel = channel.restrict_antennas(active);
  const SystemConfig sub_cfg = cfg.with_antennas(static_cast<int>(active.size()));
  out.trace = sca::sca_solve(sub_channel, sub_cfg, opts, observer);
  if (out.trace.status != sca::ScaStatus::Solved &&
      out.trace.status != sca::ScaStatus::Degraded)
    return false;
  out.full_w = embed(out.trace.final_w, active, cfg.n_antennas);
  const SystemConfig dcfg = design_cfg(sub_cfg, opts.scheme);
  out.breakdown = make_breakdown(
      pa_power(out.trace.final_w, dcfg),
      rf_power_exact(out.trace.final_w, dcfg, dcfg.on_threshold()),
      dcfg.p_static);
  return true;
}

/// true when `a` beats `b` for the chosen-candidate scan.
bool better_candidate(const PowerBreakdown& a, size_t a_active,
                      const PowerBreakdown& b, size_t b_active) {
  if (a.total < b.total - kTieTol) return true;
  if (a.total <= b.total + kTieTol && a_active < b_active) return true;
  return false;
}

void choose_best(SelectionResult& result) {
  for (size_t i = 0; i < result.candidates.size(); ++i) {
    const CandidateOutcome& c = result.candidates[i];
    if (!c.feasible) continue;
    if (result.chosen_candidate < 0 ||
        better_candidate(c.breakdown, c.active.size(),
                         result.chosen_breakdown,
                         result.chosen_active.size())) {
      result.chosen_candidate = static_cast<int>(i);
      result.chosen_active = c.active;
      result.chosen_breakdown = c.breakdown;
    }
  }
}

/// BfOnly twin of the scheme: same PA exponent, RF term out of the objective.
sca::Scheme constant_rf_scheme(sca::Scheme s) {
  return sca::scheme_fixed_pa(s) ? sca::Scheme::BfOnlyFixedPA
                                 : sca::Scheme::BfOnlyNonlinear;
}

}  // namespace

Vector antenna_weights(const BeamformerSet& w) { return w.per_antenna_powers(); }

SelectionResult select_antennas(const Channel& channel, const SystemConfig& cfg,
                                const sca::ScaOptions& opts,
                                const sca::SubproblemObserver& observer) {
  cfg.validate();
  channel.validate(cfg);
  const int n = cfg.n_antennas;

  SelectionResult result;

  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);

  SubsetRun full;
  if (!run_subset(channel, cfg, opts, all, observer, full)) {
    result.status = full.trace.status == sca::ScaStatus::Infeasible
                        ? SelectionStatus::Infeasible
                        : SelectionStatus::Failed;
    result.subproblem_solves = full.trace.subproblem_solves;
    return result;
  }
  result.subproblem_solves = full.trace.subproblem_solves;
  result.sca_iterations_full = full.trace.sca_iterations;
  result.weights = antenna_weights(full.trace.final_w);

  std::vector<BeamformerSet> candidate_w;
  result.candidates.push_back({all, true, false, full.breakdown,
                               full.trace.sca_iterations});
  candidate_w.push_back(full.full_w);

  // Switch-off order: ascending beamforming weight, index breaking ties.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return result.weights(a) < result.weights(b);
  });

  std::vector<int> active = all;
  for (int drop = 0; drop + 1 < n; ++drop) {
    active.erase(std::find(active.begin(), active.end(), order[drop]));
    SubsetRun run;
    const bool ok = run_subset(channel, cfg, opts, active, observer, run);
    result.subproblem_solves += run.trace.subproblem_solves;
    if (!ok) {
      // Nested candidates only shrink the feasible set; later ones cannot
      // become feasible again.
      result.candidates.push_back({active, false, false, PowerBreakdown{},
                                   run.trace.sca_iterations});
      candidate_w.emplace_back();
      break;
    }
    result.candidates.push_back({active, true, false, run.breakdown,
                                 run.trace.sca_iterations});
    candidate_w.push_back(run.full_w);
  }

  // Constant-RF benchmark point: the full array designed with the RF cost out
  // of the objective, priced with the same exact metric.
  {
    sca::ScaOptions bf_opts = opts;
    bf_opts.scheme = constant_rf_scheme(opts.scheme);
    SubsetRun run;
    const bool ok = run_subset(channel, cfg, bf_opts, all, observer, run);
    result.subproblem_solves += run.trace.subproblem_solves;
    if (ok) {
      result.candidates.push_back({all, true, true, run.breakdown,
                                   run.trace.sca_iterations});
      candidate_w.push_back(run.full_w);
    }
  }

  choose_best(result);
  result.chosen_w = candidate_w[result.chosen_candidate];
  result.status = SelectionStatus::Solved;
  return result;
}

SelectionResult exhaustive_select(const Channel& channel,
                                  const SystemConfig& cfg,
                                  const sca::ScaOptions& opts,
                                  int max_antennas,
                                  const sca::SubproblemObserver& observer) {
  cfg.validate();
  channel.validate(cfg);
  const int n = cfg.n_antennas;
  if (n > max_antennas)
    throw std::invalid_argument("exhaustive_select: too many antennas");

  SelectionResult result;
  std::vector<BeamformerSet> candidate_w;
  bool any_feasible = false;

  // Subsets ordered by (size, lexicographic) so ties already prefer fewer
  // antennas and the scan order is deterministic.
  std::vector<std::vector<int>> subsets;
  for (int size = 1; size <= n; ++size) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      if (std::popcount(mask) != size) continue;
      std::vector<int> active;
      for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) active.push_back(i);
      subsets.push_back(std::move(active));
    }
  }

  for (const std::vector<int>& active : subsets) {
    SubsetRun run;
    const bool ok = run_subset(channel, cfg, opts, active, observer, run);
    result.subproblem_solves += run.trace.subproblem_solves;
    result.candidates.push_back({active, ok, false,
                                 ok ? run.breakdown : PowerBreakdown{},
                                 run.trace.sca_iterations});
    candidate_w.push_back(ok ? run.full_w : BeamformerSet{});
    any_feasible = any_feasible || ok;
    if (static_cast<int>(active.size()) == n) {
      result.weights =
          ok ? antenna_weights(run.trace.final_w) : Vector::Zero(n);
      result.sca_iterations_full = run.trace.sca_iterations;
    }
  }

  if (!any_feasible) {
    result.status = SelectionStatus::Infeasible;
    return result;
  }

  {
    sca::ScaOptions bf_opts = opts;
    bf_opts.scheme = constant_rf_scheme(opts.scheme);
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    SubsetRun run;
    const bool ok = run_subset(channel, cfg, bf_opts, all, observer, run);
    result.subproblem_solves += run.trace.subproblem_solves;
    if (ok) {
      result.candidates.push_back({all, true, true, run.breakdown,
                                   run.trace.sca_iterations});
      candidate_w.push_back(run.full_w);
    }
  }

  choose_best(result);
  result.chosen_w = candidate_w[result.chosen_candidate];
  result.status = SelectionStatus::Solved;
  return result;
}

}  // namespace greenbf::antsel
