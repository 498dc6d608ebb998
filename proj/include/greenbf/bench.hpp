#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "greenbf/antsel.hpp"
#include "greenbf/channel_gen.hpp"
#include "greenbf/sca.hpp"
#include "greenbf/types.hpp"

namespace greenbf::bench {

enum class SweepAxis { SinrDb, NUsers, NAntennas, None };

std::string sweep_axis_name(SweepAxis a);
bool sweep_axis_from_name(const std::string& name, SweepAxis& out);

struct ExperimentConfig {
  SystemConfig base;
  SweepAxis axis = SweepAxis::None;
  std::vector<double> sweep_values;  ///< ignored when axis == None
  int trials = 1;
  uint64_t base_seed = 1;
  std::vector<sca::Scheme> schemes;
  double pathloss_scale = 0.0;  ///< per-entry channel variance
  std::string output_path = "sweep.csv";
  /// When false (the default) the wall_ms column is written as 0 so that
  /// identical configs produce byte-identical CSVs.
  bool record_timing = false;
  sca::ScaOptions sca;

  void validate() const;
};

enum class TrialStatus { Solved, Infeasible, Failed };

std::string trial_status_name(TrialStatus s);

/// One experiment row. Power fields are valid only when status == Solved;
/// total_w = pa_w + rf_w + p_static exactly.
struct TrialRecord {
  uint64_t seed = 0;  ///< derived channel seed
  sca::Scheme scheme = sca::Scheme::JointNonlinear;
  int n_antennas = 0;
  int n_users = 0;
  double sinr_db = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
  TrialStatus status = TrialStatus::Failed;
  double total_w = 0.0;
  double pa_w = 0.0;
  double rf_w = 0.0;
  int active_antennas = 0;
  int sca_iterations = 0;
  int candidates = 0;  ///< candidate count for Joint* (selection), 0 otherwise
  int64_t wall_ms = 0;
};

/// Run the configured sweep: for every sweep value x trial, generate the
/// channel from mix_seed(base_seed, axis tag, value index, trial) and run
/// every scheme on the same instance (select_antennas for Joint*, sca_solve
/// for BfOnly*), pricing results under the physical power model of the base
/// config. Trials run in a thread pool (override the size with the
/// GREENBF_THREADS environment variable); records are returned in
/// (value, trial, scheme) order regardless of scheduling.
std::vector<TrialRecord> run_sweep(const ExperimentConfig& exp);

/// Fixed-header CSV with '.' decimal separator and round-trip exact floats.
void write_csv(const std::vector<TrialRecord>& records, const std::string& path);
std::vector<TrialRecord> read_csv(const std::string& path);

/// Parse the key = value experiment config (documented in the README).
/// dB/dBm keys are converted to linear/watts here; unknown keys are errors.
ExperimentConfig parse_config(const std::string& path);

/// Mean and standard-error series per (sweep value, scheme) over solved
/// trials, for external plotting.
struct AggregateRow {
  double sweep_value = 0.0;
  sca::Scheme scheme = sca::Scheme::JointNonlinear;
  int n_trials = 0;
  int n_solved = 0;
  double mean_total = 0.0;
  double stderr_total = 0.0;
  double mean_pa = 0.0;
  double mean_rf = 0.0;
  double mean_active = 0.0;
  double mean_iterations = 0.0;
};

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records,
                                    SweepAxis axis);
void write_aggregate_csv(const std::vector<AggregateRow>& rows,
                         const std::string& path);

}  // namespace greenbf::bench
