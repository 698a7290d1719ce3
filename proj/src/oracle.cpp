#include "lagnet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "lagnet/analysis.hpp"
#include "lagnet/error.hpp"

namespace lagnet {

namespace {

struct KktSystem {
  const LiftedProblem& p;

  Vec residual(const Vec& x, const Vec& psi) const {
    Vec r(p.dim + p.num_constraints());
    r << lagrangian_gradient(x, psi), central_constraints(p, x);
    return r;
  }

  Vec lagrangian_gradient(const Vec& x, const Vec& psi) const {
    return central_gradient(p, x) + central_constraint_jacobian(p, x) * psi;
  }

  // Without Hessian evaluators the analytic gradient is differenced instead. The residual
  // stays analytic, so only the Newton direction is approximate.
  Mat lagrangian_hessian(const Vec& x, const Vec& psi) const {
    Mat H = Mat::Zero(p.dim, p.dim);
    if (p.has_hessians()) {
      for (const auto& a : p.agents) H += a.objective.hessian(x);
      for (int k = 0; k < p.num_constraints(); ++k)
        H += psi(k) * p.agents[p.constrained_agents[k]].constraint->hessian(x);
      return H;
    }
    for (int d = 0; d < p.dim; ++d) {
      const double h = 1e-6 * (1.0 + std::abs(x(d)));
      Vec xp = x, xm = x;
      xp(d) += h;
      xm(d) -= h;
      H.col(d) = (lagrangian_gradient(xp, psi) - lagrangian_gradient(xm, psi)) / (2.0 * h);
    }
    return 0.5 * (H + H.transpose());
  }

  Mat jacobian(const Vec& x, const Vec& psi) const {
    const int n = p.dim, m = p.num_constraints();
    const Mat G = central_constraint_jacobian(p, x);
    Mat K = Mat::Zero(n + m, n + m);
    K.topLeftCorner(n, n) = lagrangian_hessian(x, psi);
    K.topRightCorner(n, m) = G;
    K.bottomLeftCorner(m, n) = G.transpose();
    return K;
  }

  Vec initial_psi(const Vec& x) const {
    if (p.num_constraints() == 0) return Vec();
    const Mat G = central_constraint_jacobian(p, x);
    return G.completeOrthogonalDecomposition().solve(-central_gradient(p, x));
  }
};

bool newton(const KktSystem& sys, Vec& x, Vec& psi, int max_iter, double tol) {
  const int n = sys.p.dim;
  Vec r = sys.residual(x, psi);
  double rn = r.norm();
  for (int it = 0; it < max_iter && std::isfinite(rn); ++it) {
    if (rn <= 1e-2 * tol) break;
    const Vec d = sys.jacobian(x, psi).completeOrthogonalDecomposition().solve(-r);
    double t = 1.0;
    bool accepted = false;
    while (t > 1e-10) {
      const Vec xn = x + t * d.head(n);
      const Vec pn = psi + t * d.tail(d.size() - n);
      const Vec rr = sys.residual(xn, pn);
      const double rrn = rr.norm();
      if (std::isfinite(rrn) && rrn <= (1.0 - 1e-4 * t) * rn) {
        x = xn;
        psi = pn;
        r = rr;
        rn = rrn;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  return std::isfinite(rn) && rn <= tol;
}

bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a(k) != b(k)) return a(k) < b(k);
  }
  return false;
}

}  // namespace

OracleSolution solve_centralized(const LiftedProblem& p, const Vec& x_init,
                                 const OracleOptions& options) {
  if (x_init.size() != p.dim) throw Error(ErrorKind::Dimension, "oracle start has wrong size");
  const KktSystem sys{p};
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unif(-options.radius, options.radius);

  std::vector<Vec> starts{x_init};
  for (int s = 1; s < std::max(1, options.restarts); ++s) {
    Vec x = x_init;
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) += unif(rng);
    starts.push_back(x);
  }

  std::vector<KktPoint> found;
  for (const Vec& start : starts) {
    Vec x = start;
    Vec psi = sys.initial_psi(x);
    if (!psi.allFinite()) psi = Vec::Zero(p.num_constraints());
    if (!newton(sys, x, psi, options.max_newton_iter, options.tol)) continue;
    KktPoint pt{x, psi, central_objective(p, x), sys.residual(x, psi).norm()};
    const bool dup = std::any_of(found.begin(), found.end(),
                                 [&](const KktPoint& q) { return (q.x - pt.x).norm() <= 1e-8; });
    if (!dup) found.push_back(pt);
  }
  if (found.empty()) {
    throw Error(ErrorKind::Oracle, "no KKT point reached residual " + std::to_string(options.tol) +
                                       " from " + std::to_string(starts.size()) + " starts");
  }
  std::sort(found.begin(), found.end(), [](const KktPoint& a, const KktPoint& b) {
    if (a.objective != b.objective) return a.objective < b.objective;
    return lex_less(a.x, b.x);
  });

  OracleSolution sol;
  sol.x_star = found.front().x;
  sol.psi_star = found.front().psi;
  sol.kkt_residual_norm = found.front().residual;
  sol.objective = found.front().objective;
  sol.candidates = found;

  if (!p.has_hessians()) {
    sol.second_order_margin = std::numeric_limits<double>::quiet_NaN();
  } else {
    const Mat G = central_constraint_jacobian(p, sol.x_star);
    const Mat Z = p.num_constraints() == 0 ? Mat(Mat::Identity(p.dim, p.dim)) : null_space(G.transpose());
    if (Z.cols() == 0) {
      sol.second_order_margin = std::numeric_limits<double>::infinity();
    } else {
      const Mat M = Z.transpose() * sys.lagrangian_hessian(sol.x_star, sol.psi_star) * Z;
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
      sol.second_order_margin = es.eigenvalues().minCoeff();
    }
  }
  return sol;
}

LiftedSolution lifted_multipliers(const LiftedProblem& p, const OracleSolution& sol) {
  const Vec x = consensus_vector(p, sol.x_star);
  const Mat G = lifted_constraint_jacobian(p, x);
  const Eigen::Index m = p.num_constraints(), b = p.lambda_size();
  Mat A(p.x_size(), m + b);
  A << G, p.S_lift.transpose();
  const Vec rhs = -lifted_objective_gradient(p, x);
  const Vec y = A.completeOrthogonalDecomposition().solve(rhs);

  LiftedSolution out;
  out.state.x = x;
  out.state.mu = y.head(m);
  out.state.lambda = y.tail(b);
  out.stationarity_residual = (A * y - rhs).norm();
  if (!(out.stationarity_residual <= 1e-10 * std::max(1.0, rhs.norm()))) {
    throw Error(ErrorKind::InconsistentSystem,
                "lifted stationarity has residual " + std::to_string(out.stationarity_residual) +
                    "; x* is not a stationary point of the lifted problem");
  }
  return out;
}

MinimizerReport verify_minimizer(const LiftedProblem& p, const OracleSolution& sol) {
  MinimizerReport rep;
  const int n = p.dim, m = p.num_constraints();
  if (m == 0) {
    rep.assumption2_sigma_min = std::numeric_limits<double>::infinity();
  } else if (m > n) {
    rep.assumption2_sigma_min = 0.0;
  } else {
    Eigen::JacobiSVD<Mat> svd(central_constraint_jacobian(p, sol.x_star));
    rep.assumption2_sigma_min = svd.singularValues()(m - 1);
  }
  rep.assumption2_holds = rep.assumption2_sigma_min > 1e-8;

  if (!p.has_hessians()) return rep;

  rep.blockwise_pd = true;
  for (int i = 0; i < p.num_agents(); ++i) {
    Mat H = p.agents[i].objective.hessian(sol.x_star);
    if (int k = p.mu_index[i]; k >= 0 && k < sol.psi_star.size())
      H += sol.psi_star(k) * p.agents[i].constraint->hessian(sol.x_star);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
    const bool pd = es.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, H.norm());
    rep.block_pd.push_back(pd);
    rep.blockwise_pd = rep.blockwise_pd && pd;
  }

  if (rep.assumption2_holds) {
    try {
      const LiftedSolution ls = lifted_multipliers(p, sol);
      const SecondOrderResult so = second_order_check(p, ls.state);
      rep.tangent_cone_pd = so.holds;
      rep.tangent_cone_margin = so.margin;
    } catch (const Error&) {
      rep.tangent_cone_pd = false;
      rep.tangent_cone_margin = std::numeric_limits<double>::quiet_NaN();
    }
  } else {
    rep.tangent_cone_margin = std::numeric_limits<double>::quiet_NaN();
  }
  rep.first_order_plain_certified = rep.assumption2_holds && rep.blockwise_pd;
  rep.augmented_certified = rep.assumption2_holds && rep.tangent_cone_pd;
  return rep;
}

}  // namespace lagnet
