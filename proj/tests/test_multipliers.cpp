#include <gtest/gtest.h>

#include "lagnet/analysis.hpp"
#include "lagnet/error.hpp"
#include "lagnet/multipliers.hpp"
#include "test_support.hpp"

using namespace lagnet;
using lagnet::testing::perturbed;
using lagnet::testing::solve_fixture;

namespace {

Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) out(k++) = x;
  return out;
}

}  // namespace

TEST(PenaltySchedule, Examples) {
  MoMConfig cfg;
  cfg.c0 = 1;
  cfg.beta = 2;
  cfg.c_max = 10;
  std::vector<double> got;
  for (int k = 0; k < 6; ++k) got.push_back(penalty_schedule(cfg, k));
  EXPECT_EQ(got, (std::vector<double>{1, 2, 4, 8, 10, 10}));

  cfg.beta = 1 + 1e-9;
  cfg.c0 = cfg.c_max = 5;
  for (int k = 0; k < 50; ++k) EXPECT_EQ(penalty_schedule(cfg, k), 5.0);
}

TEST(PenaltySchedule, MonotoneAndCapped) {
  MoMConfig cfg;
  cfg.c0 = 0.3;
  cfg.beta = 1.7;
  cfg.c_max = 40;
  double prev = 0;
  for (int k = 0; k < 40; ++k) {
    const double c = penalty_schedule(cfg, k);
    EXPECT_GE(c, prev);
    EXPECT_LE(c, cfg.c_max);
    prev = c;
  }
  EXPECT_EQ(prev, 40.0);
}

TEST(MoMConfig, Validation) {
  MoMConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  for (auto bad : {+[](MoMConfig& c) { c.c0 = 0; }, +[](MoMConfig& c) { c.beta = 1; },
                   +[](MoMConfig& c) { c.c_max = 0.5; }, +[](MoMConfig& c) { c.eps0 = 0; },
                   +[](MoMConfig& c) { c.gamma = 1; }}) {
    MoMConfig c;
    bad(c);
    EXPECT_THROW(validate(c), Error);
  }
}

TEST(InnerMinimize, OneHandStep) {
  const auto p = make_path2().problem;
  MoMConfig cfg;
  cfg.inner_alpha = 0.1;
  cfg.inner_max_iter = 1;
  const auto r = inner_minimize(p, v({0, 0}), v({0}), v({0, 0}), 1.0, 1e-12, cfg);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_NEAR(r.x(0), 0.15, 1e-15);
  EXPECT_NEAR(r.x(1), -0.1, 1e-15);
  EXPECT_FALSE(r.reached_tolerance);
}

TEST(InnerMinimize, MatchesClosedFormOnPath2) {
  const auto p = make_path2().problem;
  MoMConfig cfg;
  const double c = 2, eps = 1e-9;
  const auto r = inner_minimize(p, v({0, 0}), v({0}), v({0, 0}), c, eps, cfg);
  EXPECT_TRUE(r.reached_tolerance);
  // (I + cL + c ∇h∇h') x = (1, -1) + c·0.5·∇h
  Mat A = Mat::Identity(2, 2) + c * p.L_lift;
  A(0, 0) += c;
  const Vec x = A.ldlt().solve(v({1 + c * 0.5, -1}));
  // The inner Hessian has smallest eigenvalue ≥ 1, so ‖x - x̂‖ ≤ ‖∇‖ ≤ eps.
  EXPECT_LE((r.x - x).norm(), eps);
  EXPECT_LE(r.gradient_norm, eps);
}

TEST(InnerMinimize, StationaryStartReturnsImmediately) {
  const auto p = make_path2().problem;
  const auto r = inner_minimize(p, v({0.5, 0.5}), v({-1}), v({0.75, -0.75}), 3.0, 1e-10, MoMConfig{});
  EXPECT_EQ(r.iterations, 0);
  EXPECT_TRUE(r.reached_tolerance);
}

TEST(InnerMinimize, DefaultStepIsInverseHessianNorm) {
  const auto p = make_path2().problem;
  const auto r = inner_minimize(p, v({0, 0}), v({0}), v({0, 0}), 1.0, 1e-6, MoMConfig{});
  Mat H(2, 2);
  H << 4, -2, -2, 3;
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  EXPECT_NEAR(r.step, 1.0 / es.eigenvalues().maxCoeff(), 1e-8);
}

TEST(InnerMinimize, OversizedStepIsInnerDivergence) {
  const auto p = make_path2().problem;
  MoMConfig cfg;
  cfg.inner_alpha = 5.0;
  try {
    inner_minimize(p, v({0.3, 0}), v({0}), v({0, 0}), 4.0, 1e-8, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InnerDivergence);
  }
}

TEST(InnerMinimize, DiminishingSchedule) {
  const auto p = make_path2().problem;
  MoMConfig cfg;
  cfg.inner_schedule = StepSchedule{1.0, 4.0};
  const auto r = inner_minimize(p, v({0, 0}), v({0}), v({0, 0}), 1.0, 1e-4, cfg);
  EXPECT_TRUE(r.reached_tolerance);
}

TEST(PowerIteration, MatchesEigensolver) {
  Mat A(3, 3);
  A << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  EXPECT_NEAR(power_iteration_norm(A), es.eigenvalues().maxCoeff(), 1e-8);
}

TEST(OuterStep, HandValues) {
  const auto p = make_path2().problem;
  const auto s = outer_step(p, {v({0.6, 0.4}), v({-1}), v({0.7, -0.7})}, 2.0);
  EXPECT_NEAR(s.mu(0), -0.8, 1e-15);
  EXPECT_NEAR(s.lambda(0), 1.1, 1e-15);
  EXPECT_NEAR(s.lambda(1), -1.1, 1e-15);
}

TEST(OuterStep, FeasibleConsensusLeavesMultipliersAlone) {
  std::mt19937_64 rng(1);
  for (const auto& name : fixture_names()) {
    const auto solved = solve_fixture(name);
    const auto& p = solved.fixture.problem;
    auto s = perturbed(solved.sol, 1.0, rng);
    s.x = solved.sol.x;
    const auto t = outer_step(p, s, 3.0);
    EXPECT_LE((t.mu - s.mu).norm(), 1e-12);
    EXPECT_LE((t.lambda - s.lambda).norm(), 1e-12);
  }
}

TEST(RunA3, Path2FromZeroMultipliers) {
  const auto solved = solve_fixture("TP-PATH2");
  const auto& p = solved.fixture.problem;
  MoMConfig cfg;
  cfg.c0 = 1;
  cfg.beta = 2;
  cfg.c_max = 16;
  cfg.outer_max_iter = 30;
  MultiplierState init = zero_state(p);
  init.x = v({0.3, 0.8});
  const auto r = run_a3(p, cfg, init);
  EXPECT_EQ(r.status, RunStatus::Converged);
  EXPECT_LE(r.iterations, 30);
  EXPECT_NEAR(r.final_state.mu(0), -1.0, 1e-6);
  EXPECT_LE((r.final_state.x - v({0.5, 0.5})).norm(), 1e-6);
  EXPECT_LE(dist_to_multiplier_set(r.final_state.lambda, solved.sol.lambda, p.J_lift), 1e-6);

  // c_k non-decreasing and capped; J λ_k constant.
  double prev = 0;
  for (const auto& rec : r.trace.records) {
    if (rec.k == 0) continue;
    EXPECT_GE(rec.c_k, prev);
    EXPECT_LE(rec.c_k, 16.0);
    prev = rec.c_k;
    EXPECT_LE((p.J_lift * rec.state.lambda - p.J_lift * init.lambda).norm(), 1e-12);
  }
}

TEST(RunA3, ExactSolutionNeedsOneOuterIteration) {
  const auto solved = solve_fixture("TP-PATH2");
  const auto r = run_a3(solved.fixture.problem, MoMConfig{}, solved.sol);
  EXPECT_EQ(r.status, RunStatus::Converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LE((r.final_state.mu - solved.sol.mu).norm(), 1e-14);
  EXPECT_LE((r.final_state.lambda - solved.sol.lambda).norm(), 1e-14);
}

TEST(RunA3, AgreesWithOracleOnAllFixtures) {
  std::mt19937_64 rng(7);
  for (const auto& name : fixture_names()) {
    const auto solved = solve_fixture(name);
    const auto& p = solved.fixture.problem;
    MoMConfig cfg;
    cfg.c0 = name == "TP-NONCONV3" ? 8.0 : 1.0;
    cfg.c_max = 32;
    cfg.tol = 1e-9;
    auto init = perturbed(solved.sol, 0.1, rng);
    const auto r = run_a3(p, cfg, init);
    EXPECT_EQ(r.status, RunStatus::Converged) << name;
    for (int i = 0; i < p.num_agents(); ++i)
      EXPECT_LE((r.final_state.x.segment(i * p.dim, p.dim) - solved.oracle.x_star).norm(), 1e-5) << name;
    EXPECT_LE((r.final_state.mu - solved.oracle.psi_star).norm(), 1e-5) << name;
  }
}
