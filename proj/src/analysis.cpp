#include "lagnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "lagnet/error.hpp"
#include "lagnet/lagrangian_solvers.hpp"

namespace lagnet {

namespace {

void require_stationary(const LiftedProblem& p, const MultiplierState& sol) {
  const double r = kkt_residual(p, sol).total();
  if (!(r <= 1e-8)) {
    throw Error(ErrorKind::NotStationary,
                "KKT residual " + format_double(r) + " exceeds 1e-8 at the supplied solution");
  }
}

Mat lifted_range_basis(const LiftedProblem& p) {
  return kron_lift(range_basis(p.incidence), p.dim);
}

// [∇h, S'] at x.
Mat extended_constraint_jacobian(const LiftedProblem& p, const Vec& x) {
  const Mat G = lifted_constraint_jacobian(p, x);
  Mat A(p.x_size(), G.cols() + p.lambda_size());
  A << G, p.S_lift.transpose();
  return A;
}

Vec symmetric_eigenvalues(const Mat& A) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

std::vector<Complex> sorted_eigenvalues(const Mat& A) {
  std::vector<Complex> out;
  if (A.rows() == 0) return out;
  Eigen::EigenSolver<Mat> es(A, false);
  const auto& ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) out.push_back(ev(i));
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

SpectralCertificate iteration_matrix_B(const LiftedProblem& p, const MultiplierState& sol,
                                       double alpha, double c) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  require_stationary(p, sol);
  const Mat H = hess_aug_lagrangian(p, sol, c);
  const Mat G = lifted_constraint_jacobian(p, sol.x);
  const Eigen::Index a = p.x_size(), m = p.num_constraints(), b = p.lambda_size();

  Mat B = Mat::Zero(a + m + b, a + m + b);
  B.block(0, 0, a, a) = H;
  B.block(0, a, a, m) = G;
  B.block(0, a + m, a, b) = p.S_lift.transpose();
  B.block(a, 0, m, a) = -G.transpose();
  B.block(a + m, 0, b, a) = -p.S_lift;
  B.block(a + m, a + m, b, b) = p.J_lift / alpha;

  SpectralCertificate cert;
  cert.matrix = c == 0.0 ? "B" : "B_c";
  cert.value = B;
  cert.eigenvalues = sorted_eigenvalues(B);
  const double tol = 1e-10 * B.norm();
  cert.verdict = std::all_of(cert.eigenvalues.begin(), cert.eigenvalues.end(),
                             [tol](Complex z) { return z.real() > tol; });
  return cert;
}

Mat restricted_iteration_matrix(const LiftedProblem& p, const MultiplierState& sol, double c) {
  const Mat H = hess_aug_lagrangian(p, sol, c);
  const Mat G = lifted_constraint_jacobian(p, sol.x);
  const Mat U = lifted_range_basis(p);
  const Eigen::Index a = p.x_size(), m = p.num_constraints(), r = U.cols();
  const Mat SU = p.S_lift.transpose() * U;

  Mat Br = Mat::Zero(a + m + r, a + m + r);
  Br.block(0, 0, a, a) = H;
  Br.block(0, a, a, m) = G;
  Br.block(0, a + m, a, r) = SU;
  Br.block(a, 0, m, a) = -G.transpose();
  Br.block(a + m, 0, r, a) = -SU.transpose();
  return Br;
}

double spectral_radius_of_step(const std::vector<Complex>& eigenvalues, double alpha) {
  double rho = 0.0;
  for (Complex z : eigenvalues) rho = std::max(rho, std::abs(1.0 - alpha * z));
  return rho;
}

StepSizeCertificate certify_from_spectrum(const std::vector<Complex>& eigenvalues,
                                          double alpha_max_search) {
  if (!(alpha_max_search > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "alpha_max_search must be positive");
  }
  auto rho = [&](double a) { return spectral_radius_of_step(eigenvalues, a); };
  auto stable = [&](double a) { return rho(a) < 1.0; };

  double lo = alpha_max_search;
  while (!stable(lo)) {
    lo *= 0.5;
    if (lo < 1e-12) {
      throw Error(ErrorKind::Certification,
                  "no step size down to 1e-12 makes the linearized iteration contractive");
    }
  }
  double hi = 2.0 * lo;
  while (stable(hi)) {
    hi *= 2.0;
    if (hi > 1e12) throw Error(ErrorKind::Certification, "stability region is unbounded");
  }
  while (hi - lo > 1e-3 * lo) {
    const double mid = 0.5 * (lo + hi);
    (stable(mid) ? lo : hi) = mid;
  }

  StepSizeCertificate cert;
  cert.alpha_bar = lo;
  cert.rho_at_bound = rho(lo);
  cert.restricted_eigenvalues = eigenvalues;

  // ρ(α)² is a maximum of convex quadratics in α, so golden-section search is exact enough.
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = lo;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = rho(x1), f2 = rho(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * lo; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = rho(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = rho(x2);
    }
  }
  cert.alpha_rate = 0.5 * (a + b);
  cert.rho_rate = rho(cert.alpha_rate);
  if (cert.rho_at_bound < cert.rho_rate) {
    cert.alpha_rate = lo;
    cert.rho_rate = cert.rho_at_bound;
  }
  return cert;
}

StepSizeCertificate certify_step_size(const LiftedProblem& p, const MultiplierState& sol, double c,
                                      double alpha_max_search) {
  require_stationary(p, sol);
  return certify_from_spectrum(sorted_eigenvalues(restricted_iteration_matrix(p, sol, c)),
                               alpha_max_search);
}

TangentConeBasis tangent_cone_basis(const LiftedProblem& p, const Vec& x_star) {
  if (x_star.size() != p.dim) throw Error(ErrorKind::Dimension, "x* has wrong size");
  const int n = p.dim, m = p.num_constraints(), N = p.num_agents();
  TangentConeBasis tc;
  if (m == 0) {
    tc.basis = Mat::Identity(n, n);
    tc.sigma_min = std::numeric_limits<double>::infinity();
  } else {
    if (m > n) throw Error(ErrorKind::Assumption2, "more constraints than dimensions");
    const Mat G = central_constraint_jacobian(p, x_star);
    Eigen::JacobiSVD<Mat> svd(G);
    tc.sigma_min = svd.singularValues()(m - 1);
    if (!(tc.sigma_min > 1e-8)) {
      throw Error(ErrorKind::Assumption2, "constraint gradients are linearly dependent at x* "
                                          "(smallest singular value " +
                                              format_double(tc.sigma_min) + ")");
    }
    tc.basis = null_space(G.transpose());
  }
  tc.lifted = Mat(p.x_size(), tc.basis.cols());
  for (Eigen::Index k = 0; k < tc.basis.cols(); ++k)
    tc.lifted.col(k) = consensus_vector(p, tc.basis.col(k)) / std::sqrt(double(N));

  const Vec xs = consensus_vector(p, x_star);
  const Mat Gl = lifted_constraint_jacobian(p, xs);
  if (tc.lifted.cols() > 0) {
    const double leak = std::max((Gl.transpose() * tc.lifted).cwiseAbs().maxCoeff(),
                                 (p.S_lift * tc.lifted).cwiseAbs().maxCoeff());
    if (leak > 1e-10) {
      throw Error(ErrorKind::InconsistentSystem, "lifted tangent vectors leave Null([∇h, S']')");
    }
  }
  Mat A(m + p.lambda_size(), p.x_size());
  A << Gl.transpose(), p.S_lift;
  const Eigen::Index nullity = null_space(A).cols();
  if (nullity != n - m) {
    throw Error(ErrorKind::InconsistentSystem,
                "lifted constraint nullspace has dimension " + std::to_string(nullity) +
                    ", expected " + std::to_string(n - m));
  }
  return tc;
}

SecondOrderResult second_order_check(const LiftedProblem& p, const MultiplierState& sol) {
  const TangentConeBasis tc = tangent_cone_basis(p, sol.x.head(p.dim));
  SecondOrderResult r;
  if (tc.lifted.cols() == 0) {
    r.holds = true;
    r.margin = std::numeric_limits<double>::infinity();
    return r;
  }
  const Mat H = hess_aug_lagrangian(p, sol, 0.0);
  const Mat M = tc.lifted.transpose() * H * tc.lifted;
  r.margin = symmetric_eigenvalues(M).minCoeff();
  r.holds = r.margin > 1e-12 * std::max(1.0, M.norm());
  return r;
}

double find_cbar(const LiftedProblem& p, const MultiplierState& sol) {
  require_stationary(p, sol);
  if (!second_order_check(p, sol).holds) {
    throw Error(ErrorKind::HypothesisViolated,
                "Hessian of the Lagrangian is not positive on the tangent cone");
  }
  auto pd = [&](double c) {
    const Vec ev = symmetric_eigenvalues(hess_aug_lagrangian(p, sol, c));
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    return ev.minCoeff() > 1e-10 * scale;
  };
  if (pd(0.0)) return 0.0;
  double hi = 1.0;
  while (!pd(hi)) {
    hi *= 2.0;
    if (hi > 1e12) {
      throw Error(ErrorKind::HypothesisViolated, "augmented Hessian stays indefinite up to c = 1e12");
    }
  }
  double lo = hi == 1.0 ? 0.0 : 0.5 * hi;
  while (hi - lo > 1e-3 * hi) {
    const double mid = 0.5 * (lo + hi);
    (pd(mid) ? hi : lo) = mid;
  }
  return hi;
}

MomRateCertificate rate_bound_mom(const LiftedProblem& p, const MultiplierState& sol, double c) {
  require_stationary(p, sol);
  const Mat H = hess_aug_lagrangian(p, sol, c);
  const Vec hev = symmetric_eigenvalues(H);
  const double hmax = hev.cwiseAbs().maxCoeff();
  if (!(hev.cwiseAbs().minCoeff() > 1e-10 * std::max(1.0, hmax))) {
    throw Error(ErrorKind::NeedLargerPenalty,
                "augmented Hessian is singular at c = " + format_double(c) + "; increase c");
  }
  const Mat A = extended_constraint_jacobian(p, sol.x);
  const Eigen::Index m = p.num_constraints(), b = p.lambda_size();
  const Mat HinvA = H.fullPivLu().solve(A);
  const Mat N = Mat::Identity(m + b, m + b) - c * A.transpose() * HinvA;

  Mat T = Mat::Identity(m + b, m + b);
  T.block(m, m, b, b) -= p.J_lift;
  const Mat Nt = T * N * T;

  MomRateCertificate out;
  out.c = c;
  out.certificate.matrix = "N_c";
  out.certificate.value = Nt;
  out.certificate.eigenvalues = sorted_eigenvalues(Nt);
  out.certificate.rate_bound = symmetric_eigenvalues(Nt).cwiseAbs().maxCoeff();
  out.certificate.verdict = out.certificate.rate_bound < 1.0;

  const Mat U = lifted_range_basis(p);
  Mat Q = Mat::Zero(m + b, m + U.cols());
  Q.block(0, 0, m, m).setIdentity();
  Q.block(m, m, b, U.cols()) = U;
  const Vec sigma = symmetric_eigenvalues(Q.transpose() * N * Q);
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    out.sigma.push_back(sigma(i));
    if (std::abs(1.0 - sigma(i)) > 1e-12) {
      const double e = c * sigma(i) / (1.0 - sigma(i));
      out.effective_e.push_back(e);
      worst = std::max(worst, -2.0 * e);
    }
  }
  out.admissible = c > worst;
  return out;
}

std::vector<double> effective_eigenvalues_direct(const LiftedProblem& p,
                                                 const MultiplierState& sol, double c) {
  require_stationary(p, sol);
  const Mat H = hess_aug_lagrangian(p, sol, c);
  const Mat A = extended_constraint_jacobian(p, sol.x);
  const Eigen::Index m = p.num_constraints(), b = p.lambda_size();
  const Mat U = lifted_range_basis(p);
  Mat Q = Mat::Zero(m + b, m + U.cols());
  Q.block(0, 0, m, m).setIdentity();
  Q.block(m, m, b, U.cols()) = U;
  const Mat AQ = A * Q;
  const Mat P = AQ.transpose() * H.fullPivLu().solve(AQ);
  Eigen::FullPivLU<Mat> lu(P);
  if (!lu.isInvertible()) {
    throw Error(ErrorKind::NeedLargerPenalty, "restricted multiplier Hessian is singular");
  }
  const Mat M = lu.inverse() - c * Mat::Identity(P.rows(), P.cols());
  const Vec e = symmetric_eigenvalues(M);
  return std::vector<double>(e.data(), e.data() + e.size());
}

double dist_to_multiplier_set(const Vec& lambda, const Vec& lambda_star, const Mat& J_lift) {
  if (lambda.size() != lambda_star.size() || lambda.size() != J_lift.rows()) {
    throw Error(ErrorKind::Dimension, "multiplier vectors and projector disagree in size");
  }
  const Vec d = lambda - lambda_star;
  return (d - J_lift * d).norm();
}

RateEstimate estimate_linear_rate(const std::vector<double>& errors, double tail_fraction,
                                  int min_records) {
  if (static_cast<int>(errors.size()) < min_records) {
    throw Error(ErrorKind::InsufficientData, "rate fit needs at least " + std::to_string(min_records) +
                                                 " records, got " + std::to_string(errors.size()));
  }
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "tail_fraction must lie in (0, 1]");
  }
  std::size_t len = 0;
  while (len < errors.size() && std::isfinite(errors[len]) && errors[len] > 0.0) ++len;
  const std::size_t start = static_cast<std::size_t>(std::floor(double(len) * (1.0 - tail_fraction)));
  if (len < start + 2) {
    throw Error(ErrorKind::InsufficientData, "fewer than two positive errors in the fitting window");
  }
  const std::size_t cnt = len - start;
  double sk = 0, sy = 0;
  for (std::size_t k = start; k < len; ++k) {
    sk += double(k);
    sy += std::log(errors[k]);
  }
  const double mk = sk / double(cnt), my = sy / double(cnt);
  double skk = 0, sky = 0, syy = 0;
  for (std::size_t k = start; k < len; ++k) {
    const double dk = double(k) - mk, dy = std::log(errors[k]) - my;
    skk += dk * dk;
    sky += dk * dy;
    syy += dy * dy;
  }
  RateEstimate r;
  r.points = static_cast<int>(cnt);
  r.slope = sky / skk;
  r.contraction = std::exp(r.slope);
  const double ss_res = std::max(0.0, syy - r.slope * sky);
  r.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return r;
}

Vec transformed_coordinates(const LiftedProblem& p, const MultiplierState& s) {
  Vec z(p.x_size() + p.num_constraints() + p.lambda_size());
  z << s.x, s.mu, s.lambda - p.J_lift * s.lambda;
  return z;
}

Vec transformed_step(const LiftedProblem& p, const MultiplierState& anchor, const Vec& z,
                     double alpha, double c) {
  const Eigen::Index a = p.x_size(), m = p.num_constraints(), b = p.lambda_size();
  if (z.size() != a + m + b) throw Error(ErrorKind::Dimension, "transformed state has wrong size");
  MultiplierState s;
  s.x = z.head(a);
  s.mu = z.segment(a, m);
  s.lambda = z.tail(b) + p.J_lift * anchor.lambda;
  return transformed_coordinates(p, stacked_step(p, s, alpha, c));
}

std::vector<RatioSample> sample_solution_ratio(const LiftedProblem& p, const MultiplierState& sol,
                                               const std::vector<double>& c_values, int samples,
                                               double radius, unsigned long long seed) {
  require_stationary(p, sol);
  const Mat T = Mat::Identity(p.lambda_size(), p.lambda_size()) - p.J_lift;
  std::vector<RatioSample> out;
  for (double c : c_values) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_real_distribution<double> scale(0.1, 1.0);
    RatioSample rs;
    rs.c = c;
    double sum = 0.0;
    for (int s = 0; s < samples; ++s) {
      Vec dmu(p.num_constraints()), dl(p.lambda_size());
      for (Eigen::Index k = 0; k < dmu.size(); ++k) dmu(k) = unif(rng);
      for (Eigen::Index k = 0; k < dl.size(); ++k) dl(k) = unif(rng);
      dl = T * dl;
      const double nrm = std::sqrt(dmu.squaredNorm() + dl.squaredNorm());
      if (nrm == 0.0) continue;
      const double target = radius * scale(rng);
      dmu *= target / nrm;
      dl *= target / nrm;

      MultiplierState st{sol.x, sol.mu + dmu, sol.lambda + dl};
      for (int it = 0; it < 100; ++it) {
        const Vec g = grad_aug_lagrangian(p, st, c);
        if (g.norm() <= 1e-13) break;
        st.x -= hess_aug_lagrangian(p, st, c).fullPivLu().solve(g);
      }
      const double ratio = c * (st.x - sol.x).norm() / target;
      rs.max_ratio = std::max(rs.max_ratio, ratio);
      sum += ratio;
    }
    rs.mean_ratio = samples > 0 ? sum / samples : 0.0;
    out.push_back(rs);
  }
  return out;
}

}  // namespace lagnet
