#include "lagnet/lagrangian_solvers.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "lagnet/agent_network.hpp"
#include "lagnet/error.hpp"

namespace lagnet {

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return "converged";
    case RunStatus::IterationCap: return "iteration-cap";
    case RunStatus::Diverged: return "diverged";
  }
  return "unknown";
}

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::A1: return "A1";
    case Algorithm::A2: return "A2";
    case Algorithm::A3: return "A3";
  }
  return "unknown";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trace_csv_header(bool outer_columns) {
  std::string h = "k,agent,err_x,err_mu,dist_lambda,kkt_stat,kkt_h,kkt_cons,objective";
  if (outer_columns) h += ",c_k,eps_k,inner_iters";
  return h;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "# problem_hash=" << trace.problem_hash << "\n";
  out << trace_csv_header(trace.has_outer_columns) << "\n";
  const double nan = std::nan("");
  for (const auto& r : trace.records) {
    const std::size_t rows = static_cast<std::size_t>(trace.num_agents);
    for (std::size_t a = 0; a < rows; ++a) {
      out << r.k << ',' << a + 1 << ',' << format_double(trace.has_errors ? r.err_x[a] : nan) << ','
          << format_double(trace.has_errors ? r.err_mu : nan) << ','
          << format_double(trace.has_errors ? r.dist_lambda : nan) << ','
          << format_double(r.kkt.stationarity) << ',' << format_double(r.kkt.constraint) << ','
          << format_double(r.kkt.consensus) << ',' << format_double(r.objective);
      if (trace.has_outer_columns) {
        out << ',' << format_double(r.c_k) << ',' << format_double(r.eps_k) << ',' << r.inner_iters;
      }
      out << '\n';
    }
  }
}

namespace {

// ∇h with every entry of each constrained agent's block stored explicitly, so the
// sparsity pattern (and hence the summation order) does not depend on x.
SparseRowMat constraint_jacobian_sparse(const LiftedProblem& p, const Vec& x) {
  std::vector<Eigen::Triplet<double>> trips;
  const int n = p.dim;
  for (int k = 0; k < p.num_constraints(); ++k) {
    const int i = p.constrained_agents[k];
    const Vec g = p.agents[i].constraint->gradient(x.segment(Eigen::Index(i) * n, n));
    for (int d = 0; d < n; ++d) trips.emplace_back(i * n + d, k, g(d));
  }
  SparseRowMat G(p.x_size(), p.num_constraints());
  G.setFromTriplets(trips.begin(), trips.end());
  return G;
}

}  // namespace

Vec stacked_gradient(const LiftedProblem& p, const MultiplierState& s, double c) {
  check_dimensions(p, s);
  const SparseRowMat G = constraint_jacobian_sparse(p, s.x);
  Vec g = lifted_objective_gradient(p, s.x);
  const Vec t1 = G * s.mu;
  g = g + t1;
  const Vec t2 = p.St_sparse * s.lambda;
  g = g + t2;
  if (c != 0.0) {
    const Vec h = lifted_constraints(p, s.x);
    const Vec t3 = G * h;
    g = g + c * t3;
    const Vec sx = p.S_sparse * s.x;
    const Vec t4 = p.St_sparse * sx;
    g = g + c * t4;
  }
  return g;
}

MultiplierState stacked_step(const LiftedProblem& p, const MultiplierState& s, double alpha,
                             double c) {
  const Vec g = stacked_gradient(p, s, c);
  MultiplierState out;
  out.x = s.x - alpha * g;
  const Vec h = lifted_constraints(p, s.x);
  out.mu = s.mu + alpha * h;
  const Vec sx = p.S_sparse * s.x;
  out.lambda = s.lambda + alpha * sx;
  return out;
}

MultiplierState step_a1(const LiftedProblem& p, const MultiplierState& s, double alpha) {
  return step_a2(p, s, alpha, 0.0);
}

MultiplierState step_a2(const LiftedProblem& p, const MultiplierState& s, double alpha, double c) {
  if (!(c >= 0.0)) throw Error(ErrorKind::InvalidArgument, "penalty c must be nonnegative");
  AgentNetwork net(p);
  net.load(s);
  net.primal_dual_round(alpha, c);
  return net.gather();
}

double state_norm(const MultiplierState& s) {
  return std::sqrt(s.x.squaredNorm() + s.mu.squaredNorm() + s.lambda.squaredNorm());
}

bool state_finite(const MultiplierState& s) {
  return s.x.allFinite() && s.mu.allFinite() && s.lambda.allFinite();
}

TraceRecord make_record(const LiftedProblem& p, int k, const MultiplierState& s) {
  TraceRecord r;
  r.k = k;
  r.state = s;
  if (state_finite(s)) {
    r.kkt = kkt_residual(p, s);
    r.objective = eval_lifted_objective(p, s.x);
  } else {
    const double inf = std::numeric_limits<double>::infinity();
    r.kkt = {inf, inf, inf};
    r.objective = inf;
  }
  return r;
}

SolverResult run_first_order(const LiftedProblem& p, const FirstOrderConfig& config,
                             const MultiplierState& init) {
  if (config.algorithm == Algorithm::A3) {
    throw Error(ErrorKind::InvalidArgument, "run_first_order handles A1 and A2 only");
  }
  if (!(config.alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  if (!(config.c >= 0.0)) throw Error(ErrorKind::InvalidArgument, "c must be nonnegative");
  if (config.max_iter < 0) throw Error(ErrorKind::InvalidArgument, "max_iter must be >= 0");
  if (config.trace_stride < 1) throw Error(ErrorKind::InvalidArgument, "trace_stride must be >= 1");
  check_dimensions(p, init);
  const double c = config.algorithm == Algorithm::A2 ? config.c : 0.0;

  SolverResult res;
  res.trace.num_agents = p.num_agents();
  MultiplierState state = init;
  res.trace.records.push_back(make_record(p, 0, state));
  if (res.trace.records.back().kkt.total() <= config.tol) {
    res.status = RunStatus::Converged;
    res.final_state = state;
    return res;
  }

  std::optional<AgentNetwork> net;
  if (config.execution == Execution::Message) {
    net.emplace(p, config.threads);
    net->load(state);
  }

  res.status = RunStatus::IterationCap;
  for (long k = 1; k <= config.max_iter; ++k) {
    if (net) {
      net->primal_dual_round(config.alpha, c);
      state = net->gather();
    } else {
      state = stacked_step(p, state, config.alpha, c);
    }
    res.iterations = k;
    TraceRecord rec = make_record(p, static_cast<int>(k), state);
    if (!state_finite(state) || state_norm(state) > config.divergence_norm) {
      res.status = RunStatus::Diverged;
    } else if (rec.kkt.total() <= config.tol) {
      res.status = RunStatus::Converged;
    }
    const bool last = res.status != RunStatus::IterationCap || k == config.max_iter;
    if (last || k % config.trace_stride == 0) res.trace.records.push_back(std::move(rec));
    if (res.status != RunStatus::IterationCap) break;
  }
  res.final_state = state;
  return res;
}

}  // namespace lagnet
