#include <doctest.h>

#include <cstring>
#include <random>

#include "greenbf/socp.hpp"
#include "oracles.hpp"

using namespace greenbf;
using namespace greenbf::socp;

namespace {

ConeProblem lp_bound_problem() {
  // min z s.t. z >= 1, as one NonNeg block.
  ConeProblem p;
  p.c = Vector::Constant(1, 1.0);
  p.G = Matrix::Constant(1, 1, -1.0);
  p.h = Vector::Constant(1, -1.0);
  p.cones.blocks = {{ConeKind::NonNeg, 1}};
  p.A.resize(0, 1);
  p.b.resize(0);
  return p;
}

ConeProblem norm_bound_problem() {
  // min t s.t. ||(3,4)|| <= t.
  ConeProblem p;
  p.c = Vector::Constant(1, 1.0);
  p.G = Matrix::Zero(3, 1);
  p.G(0, 0) = -1.0;
  p.h = Vector::Zero(3);
  p.h(1) = 3.0;
  p.h(2) = 4.0;
  p.cones.blocks = {{ConeKind::SecondOrder, 3}};
  p.A.resize(0, 1);
  p.b.resize(0);
  return p;
}

}  // namespace

TEST_CASE("one-variable lp in cone form") {
  const ConeSolution sol = solve_socp(lp_bound_problem());
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("fixed-vector norm bound") {
  const ConeSolution sol = solve_socp(norm_bound_problem());
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(5.0).epsilon(1e-8));
}

TEST_CASE("kkt_residuals: hand-built optimal pair is exact") {
  const ConeProblem p = norm_bound_problem();
  ConeSolution sol;
  sol.status = SolveStatus::Optimal;
  sol.x = Vector::Constant(1, 5.0);
  sol.s = Vector(3);
  sol.s << 5.0, 3.0, 4.0;
  sol.z = Vector(3);
  sol.z << 1.0, -0.6, -0.8;
  sol.y.resize(0);
  const Residuals r = kkt_residuals(p, sol);
  CHECK(r.primal <= 1e-12);
  CHECK(r.dual <= 1e-12);
  CHECK(r.gap <= 1e-12);
}

TEST_CASE("kkt_residuals: perturbed primal is flagged") {
  const ConeProblem p = norm_bound_problem();
  ConeSolution sol;
  sol.x = Vector::Constant(1, 5.1);  // +0.1 on the only coordinate
  sol.s = Vector(3);
  sol.s << 5.0, 3.0, 4.0;
  sol.z = Vector(3);
  sol.z << 1.0, -0.6, -0.8;
  sol.y.resize(0);
  CHECK(kkt_residuals(p, sol).primal >= 0.05);
}

TEST_CASE("kkt_residuals: solver output on random feasible socps") {
  std::mt19937_64 eng(31);
  const double tol = 1e-8;
  for (int trial = 0; trial < 30; ++trial) {
    ConeSpec cones;
    cones.blocks = {{ConeKind::NonNeg, 3},
                    {ConeKind::SecondOrder, 3 + static_cast<int>(eng() % 3)}};
    const int n_eqs = trial % 3 == 0 ? 2 : 0;
    const ConeProblem p =
        greenbf::testing::random_feasible_socp(eng, 6, cones, n_eqs);
    const ConeSolution sol = solve_socp(p, tol);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const Residuals r = kkt_residuals(p, sol);
    CHECK(r.primal <= tol);
    CHECK(r.dual <= tol);
    CHECK(r.gap <= tol);

    // Weak duality on the reported pair.
    const double dual_obj =
        -p.h.dot(sol.z) - (p.n_eqs() > 0 ? p.b.dot(sol.y) : 0.0);
    CHECK(sol.objective >= dual_obj - 1e-6 * std::max(1.0, std::abs(dual_obj)));
  }
}

TEST_CASE("grid-refinement oracle agrees on small instances") {
  std::mt19937_64 eng(77);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    // Box plus a random-origin ball keeps the feasible set fat.
    ConeProblem p;
    p.c = Vector(2);
    p.c << dist(eng), dist(eng);
    if (p.c.norm() < 0.1) continue;
    p.G = Matrix::Zero(7, 2);
    p.h = Vector::Zero(7);
    // |x_i| <= 2
    p.G(0, 0) = 1.0;
    p.h(0) = 2.0;
    p.G(1, 0) = -1.0;
    p.h(1) = 2.0;
    p.G(2, 1) = 1.0;
    p.h(2) = 2.0;
    p.G(3, 1) = -1.0;
    p.h(3) = 2.0;
    // ||x - x0|| <= 1.5 with x0 small enough to keep 0 feasible
    const double x0 = 0.4 * dist(eng);
    const double x1 = 0.4 * dist(eng);
    p.G(5, 0) = -1.0;
    p.G(6, 1) = -1.0;
    p.h(4) = 1.5;
    p.h(5) = -x0;
    p.h(6) = -x1;
    p.cones.blocks = {{ConeKind::NonNeg, 4}, {ConeKind::SecondOrder, 3}};
    p.A.resize(0, 2);
    p.b.resize(0);

    const ConeSolution sol = solve_socp(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const double oracle = greenbf::testing::grid_refine_min(p, 2.0);
    CHECK(sol.objective <= oracle + 1e-4 * std::max(1.0, std::abs(oracle)));
    CHECK(sol.objective >= oracle - 1e-4 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("primal infeasibility yields a farkas certificate") {
  // z >= 1 and z <= 0 cannot both hold.
  ConeProblem p;
  p.c = Vector::Constant(1, 1.0);
  p.G = Matrix::Zero(2, 1);
  p.G(0, 0) = -1.0;  // -1 + z >= 0
  p.G(1, 0) = 1.0;   // -z >= 0
  p.h = Vector::Zero(2);
  p.h(0) = -1.0;
  p.cones.blocks = {{ConeKind::NonNeg, 2}};
  p.A.resize(0, 1);
  p.b.resize(0);

  const ConeSolution sol = solve_socp(p);
  REQUIRE(sol.status == SolveStatus::PrimalInfeasible);
  // Certificate: z in the dual cone, h'z = -1, G'z ~ 0.
  CHECK(cone_violation(p.cones, sol.z) <= 1e-9);
  CHECK(p.h.dot(sol.z) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK((p.G.transpose() * sol.z).lpNorm<Eigen::Infinity>() <= 1e-6);
  CHECK(sol.residuals.dual <= 1e-6);
}

TEST_CASE("unbounded problem yields an improving ray") {
  // min -z s.t. z >= 0.
  ConeProblem p;
  p.c = Vector::Constant(1, -1.0);
  p.G = Matrix::Constant(1, 1, -1.0);
  p.h = Vector::Zero(1);
  p.cones.blocks = {{ConeKind::NonNeg, 1}};
  p.A.resize(0, 1);
  p.b.resize(0);

  const ConeSolution sol = solve_socp(p);
  REQUIRE(sol.status == SolveStatus::DualInfeasible);
  CHECK(p.c.dot(sol.x) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK((p.G * sol.x + sol.s).lpNorm<Eigen::Infinity>() <= 1e-6);
  CHECK(cone_violation(p.cones, sol.s) <= 1e-9);
}

TEST_CASE("second-order cone of dimension one acts as a nonneg row") {
  ConeProblem p = lp_bound_problem();
  p.cones.blocks = {{ConeKind::SecondOrder, 1}};
  const ConeSolution sol = solve_socp(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("identical problems give bit-identical solutions") {
  std::mt19937_64 eng(5);
  ConeSpec cones;
  cones.blocks = {{ConeKind::NonNeg, 2}, {ConeKind::SecondOrder, 4}};
  const ConeProblem p = greenbf::testing::random_feasible_socp(eng, 5, cones);
  const ConeSolution a = solve_socp(p);
  const ConeSolution b = solve_socp(p);
  REQUIRE(a.status == SolveStatus::Optimal);
  REQUIRE(b.status == SolveStatus::Optimal);
  CHECK(std::memcmp(a.x.data(), b.x.data(), sizeof(double) * a.x.size()) == 0);
  CHECK(std::memcmp(a.z.data(), b.z.data(), sizeof(double) * a.z.size()) == 0);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("badly scaled data still certifies") {
  // Mimics the paper-scale mix: tiny channel rows against O(1) power rows.
  std::mt19937_64 eng(13);
  std::normal_distribution<double> dist(0.0, 1.0);
  ConeProblem p;
  p.c = Vector(2);
  p.c << 1.0, 1e4;
  p.G = Matrix::Zero(5, 2);
  p.h = Vector::Zero(5);
  p.G(0, 1) = -3e-7;
  p.G(1, 0) = -1e-7 * (1.0 + std::abs(dist(eng)));
  p.h(2) = 2.8e-7;
  p.G(3, 0) = 1.0;
  p.h(3) = 1.5;
  p.G(4, 1) = 1.0;
  p.h(4) = 39.8;
  p.cones.blocks = {{ConeKind::SecondOrder, 3}, {ConeKind::NonNeg, 2}};
  p.A.resize(0, 2);
  p.b.resize(0);

  const ConeSolution sol = solve_socp(p, 1e-9);
  REQUIRE(sol.status == SolveStatus::Optimal);
  const Residuals r = kkt_residuals(p, sol);
  CHECK(r.primal <= 1e-7);
  CHECK(r.dual <= 1e-7);
  CHECK(r.gap <= 1e-7);
}

TEST_CASE("malformed problems are rejected") {
  ConeProblem p = lp_bound_problem();
  p.h.resize(2);
  CHECK_THROWS_AS((void)solve_socp(p), std::invalid_argument);
  p = lp_bound_problem();
  p.cones.blocks = {{ConeKind::NonNeg, 0}};
  CHECK_THROWS_AS((void)solve_socp(p), std::invalid_argument);
  p = lp_bound_problem();
  p.G(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS((void)solve_socp(p), std::invalid_argument);
  p = lp_bound_problem();
  CHECK_THROWS_AS((void)solve_socp(p, -1.0), std::invalid_argument);
}
