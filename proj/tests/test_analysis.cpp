#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "lagnet/analysis.hpp"
#include "lagnet/error.hpp"
#include "lagnet/multipliers.hpp"
#include "lagnet/polynomial.hpp"
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

double min_real(const std::vector<Complex>& ev) {
  double m = INFINITY;
  for (auto z : ev) m = std::min(m, z.real());
  return m;
}

int count_near(const std::vector<Complex>& ev, double target, double tol) {
  int k = 0;
  for (auto z : ev) k += std::abs(z - target) <= tol;
  return k;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(IterationMatrixB, Path2Assembly) {
  const auto solved = solve_fixture("TP-PATH2");
  const auto cert = iteration_matrix_B(solved.fixture.problem, solved.sol, 0.1, 0.0);
  ASSERT_EQ(cert.value.rows(), 5);
  Mat expected(5, 5);
  // x1 x2 | μ | λ12 λ21
  expected << 1, 0, 1, 1, -1,
              0, 1, 0, -1, 1,
              -1, 0, 0, 0, 0,
              -1, 1, 0, 5, 5,
              1, -1, 0, 5, 5;
  EXPECT_LE((cert.value - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(cert.matrix, "B");
  EXPECT_TRUE(cert.verdict);
  EXPECT_GT(min_real(cert.eigenvalues), 0.0);
  EXPECT_EQ(cert.eigenvalues.size(), 5u);
  EXPECT_EQ(count_near(cert.eigenvalues, 10.0, 1e-10), 1);

  Mat flipped = cert.value;
  flipped.topLeftCorner(2, 2) = -Mat::Identity(2, 2);
  EXPECT_LE(min_real(sorted_eigenvalues(flipped)), 0.0);
}

TEST(IterationMatrixB, AugmentedLabelAndNotStationary) {
  const auto solved = solve_fixture("TP-PATH2");
  const auto& p = solved.fixture.problem;
  EXPECT_EQ(iteration_matrix_B(p, solved.sol, 0.1, 2.0).matrix, "B_c");
  auto off = solved.sol;
  off.x(0) += 1e-3;
  EXPECT_EQ(kind_of([&] { iteration_matrix_B(p, off, 0.1, 0.0); }), ErrorKind::NotStationary);
}

TEST(IterationMatrixB, ReciprocalStepEigenvaluesMatchNullSpaceOfSTranspose) {
  for (const auto& name : fixture_names()) {
    const auto solved = solve_fixture(name);
    const auto& p = solved.fixture.problem;
    const double c = name == "TP-NONCONV3" ? 8.0 : 0.0;
    for (double alpha : {0.05, 0.2}) {
      const auto cert = iteration_matrix_B(p, solved.sol, alpha, c);
      const int expected = p.dim * (p.num_pairs() - p.num_agents() + 1);
      EXPECT_EQ(count_near(cert.eigenvalues, 1.0 / alpha, 1e-8), expected) << name;
      EXPECT_TRUE(cert.verdict) << name;
    }
  }
}

TEST(IterationMatrixB, RestrictedSpectrumIsTheRest) {
  const auto solved = solve_fixture("TP-AFFINE2");
  const auto& p = solved.fixture.problem;
  const double alpha = 0.13;
  auto full = iteration_matrix_B(p, solved.sol, alpha, 0.0).eigenvalues;
  auto rest = sorted_eigenvalues(restricted_iteration_matrix(p, solved.sol, 0.0));
  for (int k = 0; k < p.dim * (p.num_pairs() - p.num_agents() + 1); ++k) rest.push_back(1.0 / alpha);
  ASSERT_EQ(full.size(), rest.size());
  // Greedy nearest matching; position-wise comparison is fragile for conjugate pairs.
  for (Complex z : full) {
    auto it = std::min_element(rest.begin(), rest.end(),
                               [z](Complex a, Complex b) { return std::abs(a - z) < std::abs(b - z); });
    EXPECT_LE(std::abs(*it - z), 1e-8);
    rest.erase(it);
  }
}

TEST(TransformedStep, JacobianEqualsIMinusAlphaB) {
  for (const auto& name : fixture_names()) {
    const auto solved = solve_fixture(name);
    const auto& p = solved.fixture.problem;
    for (double c : {0.0, 3.0}) {
      const double alpha = 0.07;
      const Mat B = iteration_matrix_B(p, solved.sol, alpha, c).value;
      const Vec z0 = transformed_coordinates(p, solved.sol);
      Mat Jfd(z0.size(), z0.size());
      for (Eigen::Index k = 0; k < z0.size(); ++k) {
        Vec zp = z0, zm = z0;
        zp(k) += 1e-6;
        zm(k) -= 1e-6;
        Jfd.col(k) = (transformed_step(p, solved.sol, zp, alpha, c) - transformed_step(p, solved.sol, zm, alpha, c)) / 2e-6;
      }
      const Mat expected = Mat::Identity(z0.size(), z0.size()) - alpha * B;
      EXPECT_LE((Jfd - expected).cwiseAbs().maxCoeff(), 1e-6) << name << " c=" << c;
    }
  }
}

TEST(CertifyStepSize, Path2ClosedLoop) {
  const auto solved = solve_fixture("TP-PATH2");
  const auto& p = solved.fixture.problem;
  const auto cert = certify_step_size(p, solved.sol, 0.0);
  ASSERT_GT(cert.alpha_bar, 0.0);
  const Mat Br = restricted_iteration_matrix(p, solved.sol, 0.0);
  const auto ev = sorted_eigenvalues(Br);
  EXPECT_LT(spectral_radius_of_step(ev, cert.alpha_bar), 1.0);
  EXPECT_GE(spectral_radius_of_step(ev, 1.05 * cert.alpha_bar), 1.0);
  EXPECT_LE(cert.alpha_rate, cert.alpha_bar);
  EXPECT_LE(cert.rho_rate, cert.rho_at_bound);

  std::mt19937_64 rng(1);
  const auto init = perturbed(solved.sol, 0.05, rng);
  FirstOrderConfig cfg;
  cfg.max_iter = 200000;
  cfg.alpha = 0.9 * cert.alpha_bar;
  EXPECT_EQ(run_first_order(p, cfg, init).status, RunStatus::Converged);
  cfg.alpha = 1.5 * cert.alpha_bar;
  EXPECT_EQ(run_first_order(p, cfg, init).status, RunStatus::Diverged);
}

TEST(CertifyFromSpectrum, SingleRealEigenvalue) {
  // ρ(1 - α·2) < 1 iff α < 1; the best rate is at α = 1/2.
  const auto cert = certify_from_spectrum({Complex(2.0, 0.0)}, 10.0);
  EXPECT_NEAR(cert.alpha_bar, 1.0, 1e-3);
  EXPECT_NEAR(cert.alpha_rate, 0.5, 1e-4);
  EXPECT_NEAR(cert.rho_rate, 0.0, 1e-4);
  EXPECT_EQ(kind_of([] { certify_from_spectrum({Complex(-1.0, 0.0)}, 10.0); }), ErrorKind::Certification);
}

TEST(CertifyStepSize, Nonconv3NeedsPenalty) {
  const auto solved = solve_fixture("TP-NONCONV3");
  const auto& p = solved.fixture.problem;
  EXPECT_EQ(kind_of([&] { certify_step_size(p, solved.sol, 0.0); }), ErrorKind::Certification);
  const double cbar = find_cbar(p, solved.sol);
  const auto cert = certify_step_size(p, solved.sol, 1.5 * cbar);
  EXPECT_GT(cert.alpha_bar, 0.0);
  EXPECT_LT(cert.rho_rate, 1.0);
}

TEST(FindCbar, Path2IsZero) {
  const auto solved = solve_fixture("TP-PATH2");
  EXPECT_EQ(find_cbar(solved.fixture.problem, solved.sol), 0.0);
}

TEST(FindCbar, Nonconv3MatchesHandDerivation) {
  // The x₂-coordinates of ∇²L_c decouple as diag(2, 1, -2) + 2c·(path Laplacian), whose
  // determinant t² - 8t - 4 (t = 2c) vanishes at c = 2 + √5.
  const auto solved = solve_fixture("TP-NONCONV3");
  const auto& p = solved.fixture.problem;
  const double cbar = find_cbar(p, solved.sol);
  EXPECT_NEAR(cbar, 2 + std::sqrt(5.0), 1e-3 * cbar);
  auto min_eig = [&](double c) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hess_aug_lagrangian(p, solved.sol, c));
    return es.eigenvalues().minCoeff();
  };
  EXPECT_GT(min_eig(cbar), 0.0);
  EXPECT_LE(min_eig(cbar / 1.1), 0.0);
  bool seen_pd = false;
  for (double c = 0; c <= 20; c += 0.25) {
    const bool pd = min_eig(c) > 0;
    if (seen_pd) {
      EXPECT_TRUE(pd) << "c=" << c;
    }
    seen_pd = seen_pd || pd;
  }
}

TEST(TangentCone, Examples) {
  {
    const auto s = solve_fixture("TP-AFFINE2");
    const auto tc = tangent_cone_basis(s.fixture.problem, s.oracle.x_star);
    EXPECT_EQ(tc.basis.cols(), 0);
    EXPECT_EQ(tc.lifted.cols(), 0);
  }
  {
    const auto s = solve_fixture("TP-PATH2");
    EXPECT_EQ(tangent_cone_basis(s.fixture.problem, s.oracle.x_star).basis.cols(), 0);
  }
  {
    const auto s = solve_fixture("TP-NONCONV3");
    const auto& p = s.fixture.problem;
    const auto tc = tangent_cone_basis(p, s.oracle.x_star);
    ASSERT_EQ(tc.basis.cols(), 1);
    EXPECT_NEAR(std::abs(tc.basis(1, 0)), 1.0, 1e-12);
    EXPECT_LE((tc.lifted.transpose() * tc.lifted - Mat::Identity(1, 1)).norm(), 1e-12);
    EXPECT_LE((p.S_lift * tc.lifted).norm(), 1e-12);
    EXPECT_LE((lifted_constraint_jacobian(p, s.sol.x).transpose() * tc.lifted).norm(), 1e-12);
  }
}

TEST(TangentCone, DuplicateConstraintsViolateAssumption2) {
  Polynomial f(2, {{0.5, {2, 0}}, {0.5, {0, 2}}});
  Polynomial h(2, {{1.0, {1, 0}}, {1.0, {0, 1}}, {-1.0, {0, 0}}});
  const auto p = make_lifted_problem("dup", 2, {{f.as_function(), h.as_function()}, {f.as_function(), h.as_function()}},
                                     path_graph(2));
  EXPECT_EQ(kind_of([&] { tangent_cone_basis(p, v({0.5, 0.5})); }), ErrorKind::Assumption2);
}

TEST(SecondOrder, Examples) {
  const auto path2 = solve_fixture("TP-PATH2");
  EXPECT_TRUE(second_order_check(path2.fixture.problem, path2.sol).holds);

  const auto nc = solve_fixture("TP-NONCONV3");
  const auto so = second_order_check(nc.fixture.problem, nc.sol);
  EXPECT_TRUE(so.holds);
  EXPECT_NEAR(so.margin, 1.0 / 3.0, 1e-8);

  // Negated objectives: same KKT point with negated multipliers, now a maximizer on the cone.
  auto agents = nc.fixture.problem.agents;
  for (auto& a : agents) {
    auto f = a.objective;
    a.objective = {[f](const Vec& x) { return -f.value(x); }, [f](const Vec& x) { return Vec(-f.gradient(x)); },
                   [f](const Vec& x) { return Mat(-f.hessian(x)); }};
  }
  const auto neg = make_lifted_problem("neg", 2, agents, nc.fixture.problem.graph);
  MultiplierState s = nc.sol;
  s.mu = -s.mu;
  s.lambda = -s.lambda;
  ASSERT_LE(kkt_residual(neg, s).total(), 1e-10);
  EXPECT_FALSE(second_order_check(neg, s).holds);
  EXPECT_EQ(kind_of([&] { find_cbar(neg, s); }), ErrorKind::HypothesisViolated);
}

TEST(RateBoundMom, Path2) {
  const auto solved = solve_fixture("TP-PATH2");
  const auto& p = solved.fixture.problem;
  double prev = 1.0;
  for (double c : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    const auto r = rate_bound_mom(p, solved.sol, c);
    EXPECT_EQ(r.certificate.matrix, "N_c");
    EXPECT_GE(r.certificate.rate_bound, 0.0);
    EXPECT_LT(r.certificate.rate_bound, prev) << c;
    prev = r.certificate.rate_bound;
    EXPECT_TRUE(r.admissible);
    ASSERT_EQ(r.sigma.size(), r.effective_e.size());
    for (std::size_t k = 0; k < r.sigma.size(); ++k)
      EXPECT_NEAR(r.sigma[k], r.effective_e[k] / (r.effective_e[k] + c), 1e-8);
  }
  EXPECT_NEAR(rate_bound_mom(p, solved.sol, 4.0).certificate.rate_bound, 0.3631361, 1e-6);
}

TEST(RateBoundMom, EffectiveEigenvaluesAgreeAcrossRoutesAndPenalties) {
  for (const auto& name : fixture_names()) {
    const auto solved = solve_fixture(name);
    const auto& p = solved.fixture.problem;
    const double c0 = name == "TP-NONCONV3" ? 8.0 : 1.0;
    auto e1 = rate_bound_mom(p, solved.sol, c0).effective_e;
    auto e2 = rate_bound_mom(p, solved.sol, 2 * c0).effective_e;
    auto d = effective_eigenvalues_direct(p, solved.sol, c0);
    std::sort(e1.begin(), e1.end());
    std::sort(e2.begin(), e2.end());
    std::sort(d.begin(), d.end());
    ASSERT_EQ(e1.size(), d.size()) << name;
    ASSERT_EQ(e1.size(), e2.size()) << name;
    for (std::size_t k = 0; k < e1.size(); ++k) {
      EXPECT_NEAR(e1[k], d[k], 1e-8 * std::max(1.0, std::abs(d[k]))) << name;
      EXPECT_NEAR(e1[k], e2[k], 1e-7 * std::max(1.0, std::abs(e1[k]))) << name;
    }
  }
}

TEST(RateBoundMom, SingularHessianNeedsLargerPenalty) {
  const auto solved = solve_fixture("TP-NONCONV3");
  const double cbar = 2 + std::sqrt(5.0);
  EXPECT_EQ(kind_of([&] { rate_bound_mom(solved.fixture.problem, solved.sol, cbar); }),
            ErrorKind::NeedLargerPenalty);
}

// With exact inner minimization on a quadratic problem with affine constraints, the
// multiplier iteration is linear, so the observed ratio settles at the predicted rate.
TEST(RateBoundMom, ExactLinearIterationMatchesPrediction) {
  const auto solved = solve_fixture("TP-PATH2");
  const auto& p = solved.fixture.problem;
  const double c = 4.0;
  const double predicted = rate_bound_mom(p, solved.sol, c).certificate.rate_bound;
  MultiplierState s = zero_state(p);
  MoMConfig cfg;
  auto err = [&](const MultiplierState& t) {
    return std::hypot((t.mu - solved.sol.mu).norm(), dist_to_multiplier_set(t.lambda, solved.sol.lambda, p.J_lift));
  };
  std::vector<double> ratios;
  for (int k = 0; k < 14; ++k) {
    const double before = err(s);
    s.x = inner_minimize(p, s.x, s.mu, s.lambda, c, 1e-15, cfg).x;
    s = outer_step(p, s, c);
    ratios.push_back(err(s) / before);
  }
  EXPECT_NEAR(ratios.back(), predicted, 1e-3);
}

TEST(NullSpaceStructure, MuComponentVanishes) {
  for (const auto& name : fixture_names()) {
    const auto solved = solve_fixture(name);
    const auto& p = solved.fixture.problem;
    Mat A(p.x_size(), p.num_constraints() + p.lambda_size());
    A << lifted_constraint_jacobian(p, solved.sol.x), p.S_lift.transpose();
    const Mat Z = null_space(A);
    EXPECT_EQ(Z.cols(), p.dim * (p.num_pairs() - p.num_agents() + 1)) << name;
    if (Z.cols() > 0) {
      EXPECT_LE(Z.topRows(p.num_constraints()).cwiseAbs().maxCoeff(), 1e-10) << name;
    }
  }
}

TEST(DistToMultiplierSet, Examples) {
  const auto p = make_path2().problem;
  const Vec ls = v({0.75, -0.75});
  EXPECT_NEAR(dist_to_multiplier_set(ls + 5 * v({1, 1}), ls, p.J_lift), 0.0, 1e-14);
  EXPECT_NEAR(dist_to_multiplier_set(v({0, 0}), ls, p.J_lift), 1.0606601717798212, 1e-12);
  EXPECT_EQ(dist_to_multiplier_set(ls, ls, p.J_lift), 0.0);
  EXPECT_EQ(kind_of([&] { dist_to_multiplier_set(v({0}), ls, p.J_lift); }), ErrorKind::Dimension);
}

TEST(EstimateLinearRate, Synthetic) {
  std::vector<double> geo, sub;
  for (int k = 1; k <= 60; ++k) {
    geo.push_back(std::pow(0.5, k));
    sub.push_back(1.0 / k);
  }
  const auto g = estimate_linear_rate(geo);
  EXPECT_NEAR(g.contraction, 0.5, 1e-6);
  EXPECT_NEAR(g.r_squared, 1.0, 1e-12);
  const auto s = estimate_linear_rate(sub);
  EXPECT_LT(s.r_squared, g.r_squared);
  EXPECT_GT(s.contraction, 0.97);

  auto with_zeros = geo;
  for (int k = 40; k < 60; ++k) with_zeros[k] = 0.0;
  const auto t = estimate_linear_rate(with_zeros);
  EXPECT_NEAR(t.contraction, 0.5, 1e-6);

  EXPECT_EQ(kind_of([] { estimate_linear_rate({1.0, 0.5}); }), ErrorKind::InsufficientData);
}

TEST(SolutionRatio, BoundedOnNonconv3) {
  const auto solved = solve_fixture("TP-NONCONV3");
  const double cbar = find_cbar(solved.fixture.problem, solved.sol);
  const auto rows = sample_solution_ratio(solved.fixture.problem, solved.sol, {cbar * 1.01, 2 * cbar, 4 * cbar}, 100,
                                          1e-2, 3);
  ASSERT_EQ(rows.size(), 3u);
  double lo = INFINITY, hi = 0;
  for (const auto& r : rows) {
    EXPECT_TRUE(std::isfinite(r.max_ratio));
    EXPECT_GT(r.max_ratio, 0.0);
    EXPECT_LE(r.mean_ratio, r.max_ratio);
    lo = std::min(lo, r.max_ratio);
    hi = std::max(hi, r.max_ratio);
  }
  // The bound M‖η - η*‖/c has one constant M for all admissible c.
  EXPECT_LT(hi / lo, 100.0);
}
