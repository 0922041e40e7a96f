#include "oracles.hpp"

#include "spbench/clusters.hpp"
#include "spbench/solvers.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace spbench;

namespace {

// phi4 gradient system scaled by a constant, as a plain residual map.
FunctionSystem scaled_phi4(const Phi4Problem& p, double c) {
  return FunctionSystem(
      "scaled", p.dimension(), p.dimension(), [&p, c](const Vec& x) -> Vec { return c * p.gradient(x); },
      [&p, c](const Vec& x) -> Mat { return c * p.hessian(x); });
}

}  // namespace

TEST_SUITE("solvers") {

TEST_CASE("newton from all 4 reaches the positive root quadratically") {
  auto p = phi4_new(2);
  SolverConfig cfg;
  cfg.keep_trace = true;
  auto out = newton_solve(p, Vec::Constant(4, 4.0), cfg);
  REQUIRE(out.converged());
  CHECK((out.point - Vec::Constant(4, std::sqrt(20.0))).norm() < 1e-10);
  CHECK(out.residual_norm <= cfg.accept_tol);
  REQUIRE(out.trace.size() >= 3);
  for (std::size_t k = 0; k + 1 < out.trace.size(); ++k) {
    if (out.trace[k] < 1e-6 || out.trace[k + 1] == 0.0) continue;
    CHECK(out.trace[k + 1] / (out.trace[k] * out.trace[k]) < 10.0);
  }
}

TEST_CASE("newton at a stationary point takes no steps") {
  auto p = phi4_new(2);
  auto out = newton_solve(p, Vec::Zero(4));
  CHECK(out.converged());
  CHECK(out.iterations == 0);
  CHECK(out.point == Vec::Zero(4));
}

TEST_CASE("newton on the LJ dimer") {
  ClusterProblem dimer(2, LennardJones{});
  Vec r(1);
  r << 0.9;
  auto out = newton_solve(dimer, r);
  REQUIRE(out.converged());
  CHECK(out.point[0] == doctest::Approx(std::pow(2.0, 1.0 / 6.0)).epsilon(1e-12));
}

TEST_CASE("newton reports singular steps") {
  // Non-gauge-fixed XY ring: the rotation mode makes the Hessian exactly singular.
  auto p = xy_new(1, 4, Boundary::Periodic, ConstantCoupling{1.0}, 0, false);
  Vec x(4);
  x << 0.1, 0.3, -0.2, 0.4;
  auto out = newton_solve(p, x);
  CHECK(out.status == SolveStatus::SingularStep);
}

TEST_CASE("newton survives evaluation errors") {
  ClusterProblem dimer(2, Morse{});
  Vec r(1);
  r << 0.0;
  CHECK(newton_solve(dimer, r).status == SolveStatus::EvalError);
}

TEST_CASE("gradsq near a root") {
  auto p = phi4_new(2);
  SolverConfig cfg;
  cfg.max_iters = 20000;
  auto out = gradsq_solve(p, Vec::Constant(4, 4.4), cfg);
  REQUIRE(out.converged());
  CHECK(out.w_value <= 1e-20);
}

TEST_CASE("gradsq on a monotone cubic") {
  auto p = phi4_new(1, 0.6, -2.0, 0.0);
  SolverConfig cfg;
  cfg.max_iters = 20000;
  Vec x(1);
  x << 5.0;
  auto out = gradsq_solve(p, x, cfg);
  REQUIRE(out.converged());
  CHECK(std::abs(out.point[0]) < 1e-9);
}

TEST_CASE("gradsq finds the spurious minimum of x^2 + 1") {
  FunctionSystem f(
      "x2p1", 1, 1, [](const Vec& x) -> Vec { return Vec::Constant(1, x[0] * x[0] + 1.0); },
      [](const Vec& x) -> Mat { return Mat::Constant(1, 1, 2.0 * x[0]); });
  SolverConfig cfg;
  cfg.max_iters = 20000;
  Vec x(1);
  x << 1.3;
  auto out = gradsq_solve(f, x, cfg);
  CHECK(out.status == SolveStatus::SpuriousMinimum);
  CHECK(std::abs(out.point[0]) < 1e-5);
  CHECK(out.w_value == doctest::Approx(1.0));
}

TEST_CASE("gradsq never accepts W above tol squared") {
  auto p = xy_new(2, 3, Boundary::Periodic, UniformSignedCoupling{}, 11, true);
  SolverConfig cfg;
  cfg.max_iters = 3000;
  for (std::uint64_t i = 0; i < 30; ++i) {
    Rng rng(4, i);
    auto out = gradsq_solve(p, p.sample_start(rng), cfg);
    if (out.converged()) {
      CHECK(out.w_value <= cfg.accept_tol * cfg.accept_tol);
      CHECK(p.gradient(out.point).norm() <= cfg.accept_tol);
    }
  }
}

TEST_CASE("homotopy tracking") {
  auto p = phi4_new(2);
  auto out = homotopy_track(p, Vec::Constant(4, 3.0));
  REQUIRE(out.converged());
  CHECK((out.point - Vec::Constant(4, std::sqrt(20.0))).norm() < 1e-9);
  auto newton = newton_solve(p, Vec::Constant(4, 3.0));
  CHECK((newton.point - out.point).norm() < 1e-9);

  auto fixed = homotopy_track(p, Vec::Zero(4));
  REQUIRE(fixed.converged());
  CHECK(fixed.point == Vec::Zero(4));
}

TEST_CASE("homotopy endpoints on the XY ring are oracle stationary points") {
  auto p = xy_new(1, 4, Boundary::Periodic, ConstantCoupling{1.0}, 0, true);
  auto oracle = oracle::xy_grid_oracle(p);
  CHECK(oracle.isolated.size() == 2);
  REQUIRE(oracle.degenerate_levels.size() == 1);
  CHECK(oracle.degenerate_levels[0] == doctest::Approx(4.0));
  SolverConfig cfg;
  int converged = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng rng(17, i);
    auto out = homotopy_track(p, p.sample_start(rng), cfg);
    if (!out.converged()) continue;
    ++converged;
    CHECK(p.gradient(out.point).norm() <= cfg.accept_tol);
    CHECK(oracle::xy_oracle_match(oracle, classify(p, out.point)) >= 0);
  }
  CHECK(converged > 50);
}

TEST_CASE("newton and homotopy agree on decoupled phi4") {
  // Per site the homotopy path cannot cross the fold at |x| = sqrt(20/3), so it
  // lands on the root of the start's branch. A full Newton step from
  // 2 < |x| < sqrt(20/3) overshoots across the fold and, in fractal sub-bands,
  // ends at the opposite outer root; with four sites drawn from [-6, 6] about
  // one start in nine has a site in that band. Away from it the two agree.
  auto p = phi4_new(2);
  const double fold = std::sqrt(20.0 / 3.0);
  int both = 0, same = 0, interior = 0, interior_same = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    Rng rng(99, i);
    Vec x = p.sample_start(rng);
    auto a = newton_solve(p, x);
    auto b = homotopy_track(p, x);
    if (!a.converged() || !b.converged()) continue;
    const bool agree = (a.point - b.point).norm() < 1e-8;
    ++both;
    same += agree;
    bool near_fold = false;
    for (double v : x) near_fold = near_fold || (std::abs(v) > 2.0 && std::abs(v) < fold);
    if (!near_fold) {
      ++interior;
      interior_same += agree;
    }
  }
  REQUIRE(both > 900);
  REQUIRE(interior > 600);
  CHECK(interior_same >= 0.95 * interior);
  CHECK(same >= 0.85 * both);
}

TEST_CASE("damped newton is scale equivariant") {
  auto p = phi4_new(2, 0.6, 2.0, 0.3);
  SolverConfig cfg;
  cfg.keep_trace = true;
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng rng(5, i);
    Vec x = p.sample_start(rng);
    auto base = newton_solve(p, x, cfg);
    // The stopping test is absolute, so it scales with the residuals.
    SolverConfig cfg4 = cfg, cfg3 = cfg;
    cfg4.accept_tol *= 4.0;
    cfg3.accept_tol *= 3.0;
    auto four = scaled_phi4(p, 4.0);
    auto scaled = newton_solve(four, x, cfg4);
    CHECK(scaled.status == base.status);
    CHECK(scaled.iterations == base.iterations);
    CHECK(scaled.point == base.point);
    REQUIRE(scaled.trace.size() == base.trace.size());
    for (std::size_t k = 0; k < base.trace.size(); ++k) CHECK(scaled.trace[k] == 4.0 * base.trace[k]);

    auto three = scaled_phi4(p, 3.0);
    auto s3 = newton_solve(three, x, cfg3);
    CHECK(s3.iterations == base.iterations);
    CHECK((s3.point - base.point).norm() <= 1e-10 * (1.0 + base.point.norm()));
  }
}

TEST_CASE("multistart on the decoupled grid recovers the enumeration") {
  auto p = phi4_new(2);
  SolverConfig cfg;
  cfg.grid_starts = true;
  auto res = multistart(p, cfg);
  CHECK(res.stats.starts == 81);
  auto truth = phi4_enumerate_decoupled(p);
  REQUIRE(res.solutions.size() == 81);
  std::map<int, int> hist;
  for (std::size_t k = 0; k < 81; ++k) {
    CHECK((res.solutions.points[k].point - truth.points[k].point).norm() < 1e-8);
    ++hist[res.solutions.points[k].index];
  }
  CHECK(hist == std::map<int, int>{{0, 16}, {1, 32}, {2, 24}, {3, 8}, {4, 1}});
}

TEST_CASE("multistart on small Thomson and matching pennies") {
  ThomsonProblem two(2);
  SolverConfig cfg;
  cfg.starts = 50;
  cfg.seed = 3;
  auto t = multistart(two, cfg);
  REQUIRE(t.solutions.size() >= 1);
  CHECK(t.solutions.points[0].energy == doctest::Approx(0.5).epsilon(1e-12));
  int minima = 0;
  for (const auto& sp : t.solutions.points) minima += sp.index == 0;
  CHECK(minima == 1);

  NashProblem mp(matching_pennies());
  cfg.starts = 100;
  auto n = multistart(mp, cfg);
  Vec mixed(6);
  mixed << 0.5, 0.5, 0.5, 0.5, 0.0, 0.0;
  bool found = false;
  for (const auto& sp : n.solutions.points) {
    if ((sp.point - mixed).norm() < 1e-8) {
      found = true;
      CHECK(sp.feasible == std::optional<bool>(true));
    }
  }
  CHECK(found);
}

TEST_CASE("multistart converged points re-validate and ignore the thread count") {
  auto p = xy_new(2, 3, Boundary::Periodic, UniformSignedCoupling{}, 2, true);
  SolverConfig cfg;
  cfg.starts = 60;
  cfg.seed = 8;
  cfg.threads = 1;
  auto one = multistart(p, cfg);
  cfg.threads = 4;
  auto four = multistart(p, cfg);
  REQUIRE(one.solutions.size() == four.solutions.size());
  CHECK(one.stats.converged == four.stats.converged);
  for (std::size_t k = 0; k < one.solutions.size(); ++k) {
    CHECK(one.solutions.points[k].point == four.solutions.points[k].point);
    CHECK(one.solutions.points[k].provenance == four.solutions.points[k].provenance);
    CHECK(p.gradient(one.solutions.points[k].point).norm() <= cfg.accept_tol);
  }
}

TEST_CASE("campaign starts are per-id streams") {
  auto p = phi4_new(2);
  SolverConfig cfg;
  cfg.starts = 10;
  cfg.seed = 42;
  auto a = campaign_starts(p, cfg);
  cfg.starts = 20;
  auto b = campaign_starts(p, cfg);
  for (std::size_t i = 0; i < 10; ++i) CHECK(a[i] == b[i]);
  for (const auto& x : b) CHECK(x.cwiseAbs().maxCoeff() <= 6.0);
}

TEST_CASE("solver config validation") {
  auto p = phi4_new(2);
  SolverConfig cfg;
  cfg.accept_tol = 0.0;
  CHECK_THROWS(newton_solve(p, Vec::Zero(4), cfg));
  cfg = {};
  cfg.max_iters = 0;
  CHECK_THROWS(newton_solve(p, Vec::Zero(4), cfg));
  cfg = {};
  cfg.starts = 0;
  CHECK_THROWS(multistart(p, cfg));
  CHECK_THROWS(newton_solve(p, Vec::Zero(3)));
}

}  // TEST_SUITE
