#include "lagnet/multipliers.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "lagnet/agent_network.hpp"
#include "lagnet/error.hpp"

namespace lagnet {

void validate(const MoMConfig& config) {
  if (!(config.c0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "c0 must be positive");
  if (!(config.beta > 1.0)) throw Error(ErrorKind::InvalidArgument, "beta must exceed 1");
  if (!(config.c_max >= config.c0)) throw Error(ErrorKind::InvalidArgument, "c_max must be >= c0");
  if (!(config.eps0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "inner eps0 must be positive");
  if (!(config.gamma > 0.0 && config.gamma < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "inner gamma must lie in (0, 1)");
  }
  if (config.inner_alpha && !(*config.inner_alpha > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "inner alpha must be positive");
  }
  if (config.inner_schedule && !(config.inner_schedule->a > 0.0 && config.inner_schedule->b > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "inner schedule needs a > 0 and b > 0");
  }
}

double penalty_schedule(const MoMConfig& config, int k) {
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "penalty schedule index must be >= 0");
  double c = config.c0;
  for (int t = 0; t < k && c < config.c_max; ++t) c = std::min(config.beta * c, config.c_max);
  return c;
}

double power_iteration_norm(const Mat& A, int max_iter, double rel_tol) {
  const Eigen::Index n = A.rows();
  if (n == 0) return 0.0;
  // Fixed, non-symmetric start so it is not orthogonal to the dominant eigenvector of
  // the usual graph-structured matrices.
  Vec v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = 1.0 + 0.5 * std::sin(1.0 + 1.7 * double(k));
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vec w = A * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    if (std::abs(nw - est) <= rel_tol * nw) return nw;
    est = nw;
  }
  return est;
}

InnerResult inner_minimize(const LiftedProblem& p, const Vec& x_init, const Vec& mu,
                           const Vec& lambda, double c, double eps, const MoMConfig& config) {
  MultiplierState s{x_init, mu, lambda};
  check_dimensions(p, s);
  if (!(c >= 0.0)) throw Error(ErrorKind::InvalidArgument, "penalty c must be nonnegative");

  InnerResult res;
  double base_step = 0.0;
  if (config.inner_alpha) {
    base_step = *config.inner_alpha;
  } else if (!config.inner_schedule) {
    if (!p.has_hessians()) {
      throw Error(ErrorKind::Capability,
                  "inner step needs Hessians for the automatic bound; set inner.alpha");
    }
    const double L = power_iteration_norm(hess_aug_lagrangian(p, s, c));
    if (!(L > 0.0)) throw Error(ErrorKind::InvalidArgument, "augmented Hessian vanishes at warm start");
    base_step = 1.0 / L;
  }
  auto step = [&](long tau) {
    if (config.inner_schedule) return config.inner_schedule->a / (double(tau) + config.inner_schedule->b);
    return base_step;
  };
  res.step = step(0);

  std::optional<AgentNetwork> net;
  if (config.execution == Execution::Message) {
    net.emplace(p, config.threads);
    net->load(s);
  }

  for (long tau = 0;; ++tau) {
    const Vec g = net ? net->evaluate_gradients(c) : stacked_gradient(p, s, c);
    res.gradient_norm = g.norm();
    if (!std::isfinite(res.gradient_norm)) {
      throw Error(ErrorKind::InnerDivergence,
                  "inner iterate became non-finite after " + std::to_string(tau) +
                      " steps; inner alpha is likely too large");
    }
    if (res.gradient_norm <= eps) {
      res.reached_tolerance = true;
      break;
    }
    if (tau >= config.inner_max_iter) break;
    if (net) {
      net->descend(step(tau));
    } else {
      s.x = s.x - step(tau) * g;
    }
    res.iterations = tau + 1;
  }
  res.x = net ? net->gather().x : s.x;
  if (!res.x.allFinite()) {
    throw Error(ErrorKind::InnerDivergence, "inner iterate became non-finite");
  }
  return res;
}

MultiplierState outer_step(const LiftedProblem& p, const MultiplierState& s, double c) {
  check_dimensions(p, s);
  MultiplierState out = s;
  const Vec h = lifted_constraints(p, s.x);
  out.mu = s.mu + c * h;
  const Vec sx = p.S_sparse * s.x;
  out.lambda = s.lambda + c * sx;
  return out;
}

SolverResult run_a3(const LiftedProblem& p, const MoMConfig& config, const MultiplierState& init) {
  validate(config);
  check_dimensions(p, init);
  SolverResult res;
  res.trace.num_agents = p.num_agents();
  res.trace.has_outer_columns = true;
  MultiplierState state = init;
  TraceRecord first = make_record(p, 0, state);
  first.c_k = penalty_schedule(config, 0);
  first.eps_k = config.eps0;
  res.trace.records.push_back(first);

  res.status = RunStatus::IterationCap;
  double eps = config.eps0;
  for (int k = 0; k < config.outer_max_iter; ++k) {
    const double c = penalty_schedule(config, k);
    InnerResult inner;
    try {
      inner = inner_minimize(p, state.x, state.mu, state.lambda, c, eps, config);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InnerDivergence) throw;
      throw Error(ErrorKind::InnerDivergence,
                  "outer iteration " + std::to_string(k) + " (c = " + format_double(c) + "): " + e.what());
    }
    state.x = inner.x;
    if (config.execution == Execution::Message) {
      AgentNetwork net(p, config.threads);
      net.load(state);
      net.multiplier_round(c);
      state = net.gather();
    } else {
      state = outer_step(p, state, c);
    }
    res.iterations = k + 1;
    TraceRecord rec = make_record(p, k + 1, state);
    rec.c_k = c;
    rec.eps_k = eps;
    rec.inner_iters = inner.iterations;
    res.trace.records.push_back(rec);
    if (!state_finite(state) || state_norm(state) > 1e8) {
      res.status = RunStatus::Diverged;
      break;
    }
    if (rec.kkt.total() <= config.tol) {
      res.status = RunStatus::Converged;
      break;
    }
    // After the outer step the stationarity residual equals the inner gradient norm, so
    // solving far below the outer tolerance buys nothing and may be out of reach in
    // floating point.
    eps = std::max(eps * config.gamma, std::min(eps, 0.1 * config.tol));
  }
  res.final_state = state;
  return res;
}

}  // namespace lagnet
