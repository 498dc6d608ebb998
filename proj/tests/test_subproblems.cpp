#include <doctest.h>

#include <cmath>
#include <random>

#include "greenbf/channel_gen.hpp"
#include "greenbf/power_model.hpp"
#include "greenbf/subproblems.hpp"
#include "oracles.hpp"

using namespace greenbf;
using namespace greenbf::subproblems;
using testing::normalized_config;
using testing::random_beamformers;

namespace {

SystemConfig single_link_config(double gamma, double p_max, double p_sum) {
  SystemConfig cfg = normalized_config(1, 1, gamma);
  cfg.p_antenna_max = p_max;
  cfg.p_sum_max = p_sum;
  return cfg;
}

Channel unit_channel() { return Channel{CxMatrix::Constant(1, 1, 1.0)}; }

/// Offset of user k's SINR cone in the composed problem: the epigraph
/// builder contributes N+1 nonneg rows and N cones of size 2K+2 first.
int sinr_block_offset(const SystemConfig& cfg, int k) {
  const int epi = cfg.n_antennas + 1 + cfg.n_antennas * (2 * cfg.n_users + 2);
  return epi + k * (2 * (cfg.n_users - 1) + 2);
}

}  // namespace

TEST_CASE("lift/unlift: round trips are exact") {
  const LiftedLayout layout{3, 2};

  BeamformerSet single = BeamformerSet::zero(3, 2);
  single.vectors(1, 0) = Complex(1.0, 2.0);
  const Vector z = lift(single, layout);
  CHECK(z(layout.re_index(0, 1)) == 1.0);
  CHECK(z(layout.im_index(0, 1)) == 2.0);
  CHECK(z(layout.t_index(1)) == 5.0);  // |1+2i|^2
  CHECK(unlift(z, layout).vectors == single.vectors);

  const BeamformerSet zero = BeamformerSet::zero(3, 2);
  CHECK(lift(zero, layout).isZero());
  CHECK(unlift(lift(zero, layout), layout).vectors == zero.vectors);

  std::mt19937_64 eng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const BeamformerSet w = random_beamformers(eng, 3, 2);
    const BeamformerSet back = unlift(lift(w, layout), layout);
    CHECK(back.vectors == w.vectors);  // bit-exact
  }
}

TEST_CASE("layout indices are a bijection") {
  const LiftedLayout layout{4, 3};
  std::vector<bool> seen(layout.n_vars(), false);
  for (int k = 0; k < 3; ++k) {
    for (int n = 0; n < 4; ++n) {
      for (int idx : {layout.re_index(k, n), layout.im_index(k, n)}) {
        REQUIRE(idx >= 0);
        REQUIRE(idx < layout.n_vars());
        CHECK(!seen[idx]);
        seen[idx] = true;
      }
    }
  }
  for (int n = 0; n < 4; ++n) {
    CHECK(!seen[layout.t_index(n)]);
    seen[layout.t_index(n)] = true;
  }
  for (bool b : seen) CHECK(b);
}

TEST_CASE("single-user sinr cone reduces to a real-part bound") {
  SystemConfig cfg = single_link_config(4.0, 10.0, 10.0);
  cfg.sigma2 = 2.0;
  const Channel ch = unit_channel();
  const LiftedLayout layout{1, 1};
  const ConstraintRows rows = build_sinr_cones(ch, cfg, layout);
  REQUIRE(rows.cones.blocks.size() == 1);
  CHECK(rows.cones.blocks[0].size == 2);
  // Head row: -(1/sqrt(Gamma)) Re(w); tail row: the constant sigma.
  CHECK(rows.G(0, layout.re_index(0, 0)) == doctest::Approx(-0.5));
  CHECK(rows.G(0, layout.im_index(0, 0)) == doctest::Approx(0.0));
  CHECK(rows.h(0) == 0.0);
  CHECK(rows.G.row(1).isZero());
  CHECK(rows.h(1) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("solutions of built cones satisfy the sinr formula") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    SystemConfig cfg = normalized_config(4, 2, bench::db_to_linear(6.0));
    const Channel ch = bench::gen_channel(seed, 2, 4, 1.0);
    const socp::ConeProblem p = build_init_problem(ch, cfg);
    const socp::ConeSolution sol = socp::solve_socp(p, 1e-9);
    REQUIRE(sol.status == socp::SolveStatus::Optimal);
    const BeamformerSet w = unlift(sol.x, LiftedLayout{4, 2});
    for (int k = 0; k < 2; ++k)
      CHECK(sinr(ch, w, k, cfg.sigma2) >= cfg.sinr_targets(k) - 1e-6);
    for (int n = 0; n < 4; ++n)
      CHECK(w.per_antenna_power(n) <= cfg.p_antenna_max + 1e-8);
    CHECK(w.sum_power() <= cfg.p_sum_max + 1e-8);
  }
}

TEST_CASE("beamformers violating the sinr floor violate their cone") {
  std::mt19937_64 eng(19);
  SystemConfig cfg = normalized_config(4, 2, 2.0);
  const Channel ch = bench::gen_channel(3, 2, 4, 1.0);
  const LiftedLayout layout{4, 2};
  const socp::ConeProblem p = build_init_problem(ch, cfg);

  int violations_seen = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const BeamformerSet w = random_beamformers(eng, 4, 2, 0.4);
    const Vector s = p.h - p.G * lift(w, layout);
    for (int k = 0; k < 2; ++k) {
      if (sinr(ch, w, k, cfg.sigma2) >= cfg.sinr_targets(k)) continue;
      ++violations_seen;
      const int off = sinr_block_offset(cfg, k);
      const int dim = 2 * (cfg.n_users - 1) + 2;
      socp::ConeSpec block;
      block.blocks = {{socp::ConeKind::SecondOrder, dim}};
      CHECK(socp::cone_violation(block, s.segment(off, dim)) > 0.0);
    }
  }
  CHECK(violations_seen > 10);  // the sample actually exercised the check
}

TEST_CASE("epigraph pressure drives t to the antenna power") {
  // Gamma*sigma2 = 2 forces |w|^2 = 2 on a unit channel; the epigraph is
  // tight at the optimum.
  SystemConfig cfg = single_link_config(2.0, 4.0, 4.0);
  const socp::ConeProblem p = build_init_problem(unit_channel(), cfg);
  const socp::ConeSolution sol = socp::solve_socp(p, 1e-9);
  REQUIRE(sol.status == socp::SolveStatus::Optimal);
  const LiftedLayout layout{1, 1};
  const double t = sol.x(layout.t_index(0));
  const BeamformerSet w = unlift(sol.x, layout);
  CHECK(t == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(t - w.per_antenna_power(0) <= 1e-6);
  CHECK(t - w.per_antenna_power(0) >= -1e-9);
}

TEST_CASE("per-antenna cap below the required power is certified infeasible") {
  SystemConfig cfg = single_link_config(2.0, 1.9, 4.0);
  const socp::ConeProblem p = build_init_problem(unit_channel(), cfg);
  const socp::ConeSolution sol = socp::solve_socp(p, 1e-9);
  CHECK(sol.status == socp::SolveStatus::PrimalInfeasible);
}

TEST_CASE("init problem: single-user analytic optimum and infeasibility") {
  SystemConfig cfg = single_link_config(1.0, 4.0, 4.0);
  const socp::ConeSolution sol =
      socp::solve_socp(build_init_problem(unit_channel(), cfg), 1e-9);
  REQUIRE(sol.status == socp::SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-7));

  cfg.p_sum_max = 0.5;
  CHECK(socp::solve_socp(build_init_problem(unit_channel(), cfg)).status ==
        socp::SolveStatus::PrimalInfeasible);

  cfg = single_link_config(1e-9, 4.0, 4.0);
  const socp::ConeSolution tiny =
      socp::solve_socp(build_init_problem(unit_channel(), cfg), 1e-9);
  REQUIRE(tiny.status == socp::SolveStatus::Optimal);
  CHECK(tiny.objective <= 1e-6);
}

TEST_CASE("sca subproblem: beta=0 without rf reduces to scaled sum power") {
  SystemConfig cfg = normalized_config(4, 2, 1.0);
  cfg.beta = 0.0;
  const Channel ch = bench::gen_channel(5, 2, 4, 1.0);
  std::mt19937_64 eng(2);
  const BeamformerSet anchor = random_beamformers(eng, 4, 2, 0.5);
  const ScaSubproblem sub = build_sca_subproblem(ch, cfg, anchor, false);
  for (int n = 0; n < 4; ++n) {
    CHECK(sub.coeffs.alpha(n) == doctest::Approx(1.0 / cfg.eta_max));
    CHECK(sub.coeffs.rho(n) == 0.0);
    CHECK(sub.problem.c(sub.layout.t_index(n)) ==
          doctest::Approx(1.0 / cfg.eta_max));
  }
  CHECK(sub.coeffs.constant == doctest::Approx(0.0));
}

TEST_CASE("sca subproblem: uniform anchors give uniform weights") {
  SystemConfig cfg = normalized_config(4, 2, 1.0);
  const Channel ch = bench::gen_channel(6, 2, 4, 1.0);
  BeamformerSet anchor = BeamformerSet::zero(4, 2);
  for (int n = 0; n < 4; ++n) anchor.vectors(n, 0) = 0.3;
  const ScaSubproblem sub = build_sca_subproblem(ch, cfg, anchor, true);
  for (int n = 1; n < 4; ++n) {
    CHECK(sub.coeffs.alpha(n) == doctest::Approx(sub.coeffs.alpha(0)));
    CHECK(sub.coeffs.rho(n) == doctest::Approx(sub.coeffs.rho(0)));
  }
}

TEST_CASE("sca subproblem: surrogate objective is tangent at the anchor") {
  SystemConfig cfg = normalized_config(5, 3, 1.0);
  const Channel ch = bench::gen_channel(8, 3, 5, 1.0);
  std::mt19937_64 eng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const BeamformerSet anchor = random_beamformers(eng, 5, 3, 0.4);
    const ScaSubproblem sub = build_sca_subproblem(ch, cfg, anchor, true);
    const Vector tb = anchor.per_antenna_powers();
    double at_anchor = sub.coeffs.constant;
    for (int n = 0; n < 5; ++n)
      at_anchor += (sub.coeffs.alpha(n) + sub.coeffs.rho(n)) * tb(n);
    const double expect =
        pa_power(anchor, cfg) + rf_power_smoothed(anchor, cfg);
    CHECK(at_anchor == doctest::Approx(expect).epsilon(1e-10));
    CHECK(sub.coeffs.alpha.minCoeff() >= 0.0);
    CHECK(sub.coeffs.rho.minCoeff() >= 0.0);
  }
}

TEST_CASE("epigraph variables are tight whenever their weight is positive") {
  std::mt19937_64 eng(4);
  for (uint64_t seed = 20; seed < 25; ++seed) {
    SystemConfig cfg = normalized_config(4, 2, 2.0);
    const Channel ch = bench::gen_channel(seed, 2, 4, 1.0);
    const BeamformerSet anchor = random_beamformers(eng, 4, 2, 0.5);
    const ScaSubproblem sub = build_sca_subproblem(ch, cfg, anchor, true);
    const socp::ConeSolution sol = socp::solve_socp(sub.problem, 1e-9);
    REQUIRE(sol.status == socp::SolveStatus::Optimal);
    const BeamformerSet w = unlift(sol.x, sub.layout);
    for (int n = 0; n < 4; ++n) {
      if (sub.problem.c(sub.layout.t_index(n)) < 1e-10) continue;
      CHECK(sol.x(sub.layout.t_index(n)) - w.per_antenna_power(n) <= 1e-6);
    }
  }
}
