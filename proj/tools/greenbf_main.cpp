#include <CLI11.hpp>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "greenbf/antsel.hpp"
#include "greenbf/bench.hpp"
#include "greenbf/channel_gen.hpp"
#include "greenbf/power_model.hpp"
#include "greenbf/sca.hpp"
#include "greenbf/subproblems.hpp"

using namespace greenbf;

namespace {

int cmd_solve(const std::string& config_path, uint64_t seed,
              const std::string& scheme_name) {
  bench::ExperimentConfig exp = bench::parse_config(config_path);
  sca::Scheme scheme;
  if (!sca::scheme_from_name(scheme_name, scheme)) {
    std::fprintf(stderr, "unknown scheme: %s\n", scheme_name.c_str());
    return 1;
  }
  const SystemConfig& cfg = exp.base;
  const Channel channel =
      bench::gen_channel(seed, cfg.n_users, cfg.n_antennas, exp.pathloss_scale);

  sca::ScaOptions opts = exp.sca;
  opts.scheme = scheme;

  std::printf("instance: N=%d K=%d gamma=%.4g dB seed=%" PRIu64 "\n",
              cfg.n_antennas, cfg.n_users,
              bench::linear_to_db(cfg.sinr_targets(0)), seed);

  BeamformerSet w;
  int iterations = 0;
  int candidates = 0;
  if (sca::scheme_is_joint(scheme)) {
    const antsel::SelectionResult sel =
        antsel::select_antennas(channel, cfg, opts);
    if (sel.status != antsel::SelectionStatus::Solved) {
      std::printf("status: %s\n",
                  sel.status == antsel::SelectionStatus::Infeasible
                      ? "infeasible"
                      : "failed");
      return sel.status == antsel::SelectionStatus::Infeasible ? 0 : 1;
    }
    w = sel.chosen_w;
    iterations = sel.sca_iterations_full;
    candidates = static_cast<int>(sel.candidates.size());
  } else {
    const sca::ScaTrace trace = sca::sca_solve(channel, cfg, opts);
    if (trace.status == sca::ScaStatus::Infeasible) {
      std::printf("status: infeasible\n");
      return 0;
    }
    if (trace.status == sca::ScaStatus::Failed) {
      std::printf("status: failed\n");
      return 1;
    }
    w = trace.final_w;
    iterations = trace.sca_iterations;
  }

  const double pa = pa_power(w, cfg);
  const double rf = sca::scheme_is_joint(scheme)
                        ? rf_power_exact(w, cfg, cfg.on_threshold())
                        : cfg.p_rf * cfg.n_antennas;
  const PowerBreakdown b = make_breakdown(pa, rf, cfg.p_static);

  std::printf("status: solved (%s, %d sca iterations", scheme_name.c_str(),
              iterations);
  if (candidates > 0) std::printf(", %d candidates", candidates);
  std::printf(")\n");
  std::printf("power [W]: total=%.6f pa=%.6f rf=%.6f static=%.6f\n", b.total,
              b.pa, b.rf, b.static_power);
  std::printf("active antennas:");
  int active = 0;
  for (int n = 0; n < cfg.n_antennas; ++n) {
    if (w.per_antenna_power(n) > cfg.on_threshold()) {
      std::printf(" %d", n);
      ++active;
    }
  }
  std::printf(" (%d of %d)\n", active, cfg.n_antennas);
  std::printf("per-antenna output power [W]:");
  for (int n = 0; n < cfg.n_antennas; ++n)
    std::printf(" %.4g", w.per_antenna_power(n));
  std::printf("\n");
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& output_override) {
  bench::ExperimentConfig exp = bench::parse_config(config_path);
  if (!output_override.empty()) exp.output_path = output_override;
  const std::vector<bench::TrialRecord> records = bench::run_sweep(exp);
  bench::write_csv(records, exp.output_path);
  int solved = 0, infeasible = 0, failed = 0;
  for (const bench::TrialRecord& r : records) {
    switch (r.status) {
      case bench::TrialStatus::Solved: ++solved; break;
      case bench::TrialStatus::Infeasible: ++infeasible; break;
      case bench::TrialStatus::Failed: ++failed; break;
    }
  }
  std::printf("%zu records -> %s (%d solved, %d infeasible, %d failed)\n",
              records.size(), exp.output_path.c_str(), solved, infeasible,
              failed);
  return failed == 0 ? 0 : 1;
}

int cmd_plotdata(const std::string& input, const std::string& output,
                 const std::string& axis_name) {
  const std::vector<bench::TrialRecord> records = bench::read_csv(input);
  bench::SweepAxis axis = bench::SweepAxis::None;
  if (axis_name == "auto") {
    std::set<double> gammas;
    std::set<int> users, antennas;
    for (const bench::TrialRecord& r : records) {
      gammas.insert(r.sinr_db);
      users.insert(r.n_users);
      antennas.insert(r.n_antennas);
    }
    if (gammas.size() > 1)
      axis = bench::SweepAxis::SinrDb;
    else if (users.size() > 1)
      axis = bench::SweepAxis::NUsers;
    else if (antennas.size() > 1)
      axis = bench::SweepAxis::NAntennas;
  } else if (!bench::sweep_axis_from_name(axis_name, axis)) {
    std::fprintf(stderr, "unknown axis: %s\n", axis_name.c_str());
    return 1;
  }
  const std::vector<bench::AggregateRow> rows = bench::aggregate(records, axis);
  bench::write_aggregate_csv(rows, output);
  std::printf("%zu series rows -> %s (axis %s)\n", rows.size(), output.c_str(),
              bench::sweep_axis_name(axis).c_str());
  return 0;
}

// Compact oracle suite; the full acceptance suite lives in the test binary.
int cmd_selftest() {
  int failures = 0;
  auto check = [&](bool ok, const char* name) {
    std::printf("%s  %s\n", ok ? "PASS" : "FAIL", name);
    if (!ok) ++failures;
  };

  {
    SystemConfig cfg;
    cfg.n_antennas = 1;
    cfg.n_users = 1;
    cfg.sinr_targets = Vector::Constant(1, 1.0);
    cfg.p_antenna_max = 1.5;
    cfg.p_sum_max = 39.810717055349734;
    cfg.eta_max = 0.38;
    cfg.beta = 0.5;
    cfg.p_rf = 0.35;
    cfg.p_static = 20.0;
    cfg.sigma2 = 1.0;
    cfg.epsilon = 1.5e-4;
    BeamformerSet w = BeamformerSet::zero(1, 1);
    w.vectors(0, 0) = Complex(std::sqrt(1.5), 0.0);
    check(std::abs(pa_power(w, cfg) - 1.5 / 0.38) < 1e-12,
          "pa_power at the per-antenna cap");
    check(std::abs(indicator_approx(1e-2, 1e-2) -
                   std::log(2.0) / std::log(101.0)) < 1e-15,
          "smoothed indicator hand value");
    check(std::abs(bench::noise_power(-174.0, 2e7) - 7.9621e-14) < 1e-17,
          "noise power at -174 dBm/Hz x 20 MHz");
  }

  {
    socp::ConeProblem p;
    p.c = Vector::Constant(1, 1.0);
    p.G = Matrix::Constant(1, 1, -1.0);
    p.h = Vector::Constant(1, -1.0);
    p.cones.blocks = {{socp::ConeKind::NonNeg, 1}};
    p.A.resize(0, 1);
    p.b.resize(0);
    const socp::ConeSolution sol = socp::solve_socp(p);
    check(sol.status == socp::SolveStatus::Optimal &&
              std::abs(sol.objective - 1.0) < 1e-7,
          "lp toy min z s.t. z >= 1");
  }

  {
    socp::ConeProblem p;
    p.c = Vector::Constant(1, 1.0);
    p.G = Matrix::Zero(3, 1);
    p.G(0, 0) = -1.0;
    p.h = Vector::Zero(3);
    p.h(1) = 3.0;
    p.h(2) = 4.0;
    p.cones.blocks = {{socp::ConeKind::SecondOrder, 3}};
    p.A.resize(0, 1);
    p.b.resize(0);
    const socp::ConeSolution sol = socp::solve_socp(p);
    const socp::Residuals res = socp::kkt_residuals(p, sol);
    check(sol.status == socp::SolveStatus::Optimal &&
              std::abs(sol.objective - 5.0) < 1e-7 && res.primal < 1e-7 &&
              res.dual < 1e-7 && res.gap < 1e-7,
          "soc toy min t s.t. ||(3,4)|| <= t");
  }

  {
    // Analytic single-user optimum gamma*sigma2/||h||^2.
    int ok = 0;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
      SystemConfig cfg;
      cfg.n_antennas = 4;
      cfg.n_users = 1;
      cfg.sinr_targets = Vector::Constant(1, 4.0);
      cfg.p_antenna_max = 1e3;
      cfg.p_sum_max = 1e3;
      cfg.eta_max = 0.38;
      cfg.beta = 0.5;
      cfg.p_rf = 0.35;
      cfg.p_static = 20.0;
      cfg.sigma2 = 1.0;
      cfg.epsilon = 0.1;
      const Channel ch = bench::gen_channel(seed, 1, 4, 1.0);
      const socp::ConeProblem init = subproblems::build_init_problem(ch, cfg);
      const socp::ConeSolution sol = socp::solve_socp(init, 1e-9);
      const double expect = 4.0 * cfg.sigma2 / ch.entries.squaredNorm();
      if (sol.status == socp::SolveStatus::Optimal &&
          std::abs(sol.objective - expect) <= 1e-6 * expect)
        ++ok;
    }
    check(ok == 20, "single-user min power matches gamma*sigma2/||h||^2");
  }

  {
    // Surrogate upper bounds on random pairs.
    SystemConfig cfg;
    cfg.n_antennas = 6;
    cfg.n_users = 3;
    cfg.sinr_targets = Vector::Constant(3, 1.0);
    cfg.p_antenna_max = 1.5;
    cfg.p_sum_max = 40.0;
    cfg.eta_max = 0.38;
    cfg.beta = 0.5;
    cfg.p_rf = 0.35;
    cfg.p_static = 20.0;
    cfg.sigma2 = 1.0;
    cfg.epsilon = 1.5e-4;
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> dist(1e-6, 1.5);
    bool ok = true;
    for (int trial = 0; trial < 2000 && ok; ++trial) {
      Vector t(6), tb(6);
      for (int n = 0; n < 6; ++n) {
        t(n) = dist(eng);
        tb(n) = dist(eng);
      }
      ok = pa_surrogate(t, tb, cfg) >= pa_power(t, cfg) - 1e-10 &&
           rf_surrogate(t, tb, cfg) >= rf_power_smoothed(t, cfg) - 1e-10;
    }
    check(ok, "surrogates dominate on random pairs");
  }

  {
    // SCA monotonicity on a small joint instance.
    SystemConfig cfg;
    cfg.n_antennas = 6;
    cfg.n_users = 2;
    cfg.sinr_targets = Vector::Constant(2, bench::db_to_linear(6.0));
    cfg.p_antenna_max = 1.5;
    cfg.p_sum_max = 39.81;
    cfg.eta_max = 0.38;
    cfg.beta = 0.5;
    cfg.p_rf = 0.35;
    cfg.p_static = 20.0;
    cfg.sigma2 = 1.0;
    cfg.epsilon = 1.5e-4;
    const Channel ch = bench::gen_channel(11, 2, 6, 1.0);
    const sca::ScaTrace trace = sca::sca_solve(ch, cfg, sca::ScaOptions{});
    bool ok = trace.status == sca::ScaStatus::Solved &&
              trace.iterations.size() >= 2;
    for (size_t i = 1; ok && i < trace.iterations.size(); ++i)
      ok = trace.iterations[i].smoothed_objective <=
           trace.iterations[i - 1].smoothed_objective + 1e-9;
    check(ok, "sca smoothed objective is non-increasing");
  }

  if (failures == 0) std::printf("selftest: all checks passed\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SINR-constrained downlink beamforming power minimization"};
  app.require_subcommand(1);

  std::string config_path;
  std::string scheme = "joint_nonlinear";
  uint64_t seed = 1;
  CLI::App* solve = app.add_subcommand("solve", "solve one instance");
  solve->add_option("--config", config_path, "config file")->required();
  solve->add_option("--seed", seed, "channel seed");
  solve->add_option("--scheme", scheme, "design scheme");

  std::string sweep_config;
  std::string sweep_output;
  CLI::App* sweep = app.add_subcommand("sweep", "run the configured sweep");
  sweep->add_option("--config", sweep_config, "config file")->required();
  sweep->add_option("--output", sweep_output, "override output csv path");

  std::string plot_in, plot_out, plot_axis = "auto";
  CLI::App* plot = app.add_subcommand("plotdata", "aggregate a sweep csv");
  plot->add_option("--input", plot_in, "sweep csv")->required();
  plot->add_option("--output", plot_out, "aggregated csv")->required();
  plot->add_option("--axis", plot_axis, "sweep axis (auto by default)");

  CLI::App* selftest = app.add_subcommand("selftest", "run the oracle suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(config_path, seed, scheme);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_output);
    if (plot->parsed()) return cmd_plotdata(plot_in, plot_out, plot_axis);
    if (selftest->parsed()) return cmd_selftest();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
