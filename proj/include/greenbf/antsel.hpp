#pragma once

#include <vector>

#include "greenbf/sca.hpp"
#include "greenbf/types.hpp"

namespace greenbf::antsel {

/// Beamforming weight of each antenna, v_n = sum_k |w_{k,n}|^2. Identical to
/// the per-antenna transmit power.
Vector antenna_weights(const BeamformerSet& w);

struct CandidateOutcome {
  std::vector<int> active;     ///< antenna indices kept on (ascending)
  bool feasible = false;
  bool constant_rf = false;    ///< full-array benchmark run without RF pressure
  PowerBreakdown breakdown;    ///< design-model exact total (valid iff feasible)
  int sca_iterations = 0;
};

enum class SelectionStatus { Solved, Infeasible, Failed };

struct SelectionResult {
  SelectionStatus status = SelectionStatus::Failed;
  Vector weights;                          ///< v_n from the full-array run
  std::vector<CandidateOutcome> candidates;
  int chosen_candidate = -1;               ///< index into candidates
  std::vector<int> chosen_active;
  BeamformerSet chosen_w;                  ///< full size, zero rows off the active set
  PowerBreakdown chosen_breakdown;
  int sca_iterations_full = 0;
  int subproblem_solves = 0;
};

/// Beamforming-weight antenna on/off selection: solve the full array, sort
/// antennas by ascending weight, evaluate the nested candidate chain obtained
/// by switching off the smallest-weight antenna each step (stopping at the
/// first infeasible candidate), and keep the feasible candidate with minimum
/// exact total power, ties toward fewer active antennas. A full-array run
/// with the RF term held constant is evaluated as one extra candidate so the
/// constant-RF design is always in the comparison set.
///
/// Candidate totals use the scheme's design-time power model (beta forced to
/// zero for the *FixedPA schemes); callers report final results under the
/// physical model separately.
SelectionResult select_antennas(const Channel& channel, const SystemConfig& cfg,
                                const sca::ScaOptions& opts,
                                const sca::SubproblemObserver& observer = {});

/// Oracle for the heuristic: evaluate every nonempty antenna subset (plus
/// the same constant-RF benchmark candidate) and return the exact-total
/// minimizer. Intended for tests with small arrays; throws when
/// cfg.n_antennas exceeds max_antennas.
SelectionResult exhaustive_select(const Channel& channel,
                                  const SystemConfig& cfg,
                                  const sca::ScaOptions& opts,
                                  int max_antennas = 12,
                                  const sca::SubproblemObserver& observer = {});

}  // namespace greenbf::antsel
