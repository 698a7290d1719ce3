#include "lagnet/problem.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "lagnet/error.hpp"

namespace lagnet {

namespace {

auto block(const Vec& v, int i, int n) { return v.segment(Eigen::Index(i) * n, n); }

void require_nonnegative(double c) {
  if (!(c >= 0.0)) throw Error(ErrorKind::InvalidArgument, "penalty c must be nonnegative");
}

SparseRowMat to_sparse(const Mat& A) {
  SparseRowMat out = A.sparseView();
  out.makeCompressed();
  return out;
}

}  // namespace

bool LiftedProblem::has_hessians() const {
  for (const auto& a : agents) {
    if (!a.objective.has_hessian()) return false;
    if (a.constraint && !a.constraint->has_hessian()) return false;
  }
  return true;
}

LiftedProblem make_lifted_problem(std::string name, int dim, std::vector<LocalProblem> agents,
                                  const GraphSpec& graph) {
  if (dim <= 0) throw Error(ErrorKind::Dimension, "problem dimension must be positive");
  if (static_cast<int>(agents.size()) != graph.num_agents) {
    throw Error(ErrorKind::Dimension, "graph has " + std::to_string(graph.num_agents) +
                                          " agents but " + std::to_string(agents.size()) +
                                          " local problems were given");
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    if (!a.objective.value || !a.objective.gradient) {
      throw Error(ErrorKind::Capability,
                  "agent " + std::to_string(i + 1) + " lacks an objective value or gradient");
    }
    if (a.constraint && (!a.constraint->value || !a.constraint->gradient)) {
      throw Error(ErrorKind::Capability,
                  "agent " + std::to_string(i + 1) + " lacks a constraint value or gradient");
    }
  }

  LiftedProblem p;
  p.name = std::move(name);
  p.dim = dim;
  p.agents = std::move(agents);
  p.graph = graph;
  p.incidence = build_incidence(graph);
  if (!check_connected(graph)) {
    throw Error(ErrorKind::DisconnectedGraph, "communication graph is not connected");
  }
  p.L = laplacian(p.incidence);
  p.projector = nullspace_projector(p.incidence);
  p.S_lift = kron_lift(p.incidence.S, dim);
  p.L_lift = kron_lift(p.L, dim);
  p.J_lift = kron_lift(p.projector.J, dim);
  p.S_sparse = to_sparse(p.S_lift);
  p.St_sparse = to_sparse(p.S_lift.transpose());

  p.mu_index.assign(p.agents.size(), -1);
  for (std::size_t i = 0; i < p.agents.size(); ++i) {
    if (p.agents[i].constraint) {
      p.mu_index[i] = static_cast<int>(p.constrained_agents.size());
      p.constrained_agents.push_back(static_cast<int>(i));
    }
  }
  // The constraint gradients can only be independent when there are at most n of them.
  if (p.num_constraints() > dim) {
    throw Error(ErrorKind::Dimension, std::to_string(p.num_constraints()) +
                                          " constrained agents exceed the dimension n = " +
                                          std::to_string(dim));
  }
  return p;
}

MultiplierState zero_state(const LiftedProblem& p) {
  return {Vec::Zero(p.x_size()), Vec::Zero(p.num_constraints()), Vec::Zero(p.lambda_size())};
}

void check_dimensions(const LiftedProblem& p, const MultiplierState& s) {
  if (s.x.size() != p.x_size() || s.mu.size() != p.num_constraints() ||
      s.lambda.size() != p.lambda_size()) {
    std::ostringstream msg;
    msg << "state sizes (x " << s.x.size() << ", mu " << s.mu.size() << ", lambda "
        << s.lambda.size() << ") do not match problem (" << p.x_size() << ", "
        << p.num_constraints() << ", " << p.lambda_size() << ")";
    throw Error(ErrorKind::Dimension, msg.str());
  }
}

Vec consensus_vector(const LiftedProblem& p, const Vec& z) {
  if (z.size() != p.dim) throw Error(ErrorKind::Dimension, "consensus point has wrong size");
  return z.replicate(p.num_agents(), 1);
}

double eval_lifted_objective(const LiftedProblem& p, const Vec& x) {
  if (x.size() != p.x_size()) throw Error(ErrorKind::Dimension, "x has wrong size");
  double total = 0.0;
  for (int i = 0; i < p.num_agents(); ++i) total += p.agents[i].objective.value(block(x, i, p.dim));
  return total;
}

Vec lifted_objective_gradient(const LiftedProblem& p, const Vec& x) {
  Vec g(p.x_size());
  for (int i = 0; i < p.num_agents(); ++i)
    g.segment(Eigen::Index(i) * p.dim, p.dim) = p.agents[i].objective.gradient(block(x, i, p.dim));
  return g;
}

Vec lifted_constraints(const LiftedProblem& p, const Vec& x) {
  Vec h(p.num_constraints());
  for (int k = 0; k < p.num_constraints(); ++k) {
    int i = p.constrained_agents[k];
    h(k) = p.agents[i].constraint->value(block(x, i, p.dim));
  }
  return h;
}

Mat lifted_constraint_jacobian(const LiftedProblem& p, const Vec& x) {
  Mat G = Mat::Zero(p.x_size(), p.num_constraints());
  for (int k = 0; k < p.num_constraints(); ++k) {
    int i = p.constrained_agents[k];
    G.block(Eigen::Index(i) * p.dim, k, p.dim, 1) = p.agents[i].constraint->gradient(block(x, i, p.dim));
  }
  return G;
}

double central_objective(const LiftedProblem& p, const Vec& x) {
  double total = 0.0;
  for (const auto& a : p.agents) total += a.objective.value(x);
  return total;
}

Vec central_gradient(const LiftedProblem& p, const Vec& x) {
  Vec g = Vec::Zero(p.dim);
  for (const auto& a : p.agents) g += a.objective.gradient(x);
  return g;
}

Vec central_constraints(const LiftedProblem& p, const Vec& x) {
  Vec h(p.num_constraints());
  for (int k = 0; k < p.num_constraints(); ++k) h(k) = p.agents[p.constrained_agents[k]].constraint->value(x);
  return h;
}

Mat central_constraint_jacobian(const LiftedProblem& p, const Vec& x) {
  Mat G(p.dim, p.num_constraints());
  for (int k = 0; k < p.num_constraints(); ++k)
    G.col(k) = p.agents[p.constrained_agents[k]].constraint->gradient(x);
  return G;
}

double eval_lagrangian(const LiftedProblem& p, const MultiplierState& s) {
  check_dimensions(p, s);
  return eval_lifted_objective(p, s.x) + s.mu.dot(lifted_constraints(p, s.x)) +
         s.lambda.dot(p.S_lift * s.x);
}

double eval_aug_lagrangian(const LiftedProblem& p, const MultiplierState& s, double c) {
  require_nonnegative(c);
  const double base = eval_lagrangian(p, s);
  if (c == 0.0) return base;
  const Vec h = lifted_constraints(p, s.x);
  return base + 0.5 * c * h.squaredNorm() + 0.5 * c * s.x.dot(p.L_lift * s.x);
}

Vec grad_aug_lagrangian(const LiftedProblem& p, const MultiplierState& s, double c) {
  require_nonnegative(c);
  check_dimensions(p, s);
  const Mat G = lifted_constraint_jacobian(p, s.x);
  Vec g = lifted_objective_gradient(p, s.x) + G * s.mu + p.S_lift.transpose() * s.lambda;
  if (c != 0.0) g += c * (G * lifted_constraints(p, s.x)) + c * (p.L_lift * s.x);
  return g;
}

Mat hess_aug_lagrangian(const LiftedProblem& p, const MultiplierState& s, double c) {
  require_nonnegative(c);
  check_dimensions(p, s);
  if (!p.has_hessians()) {
    throw Error(ErrorKind::Capability, "Hessian evaluators are missing for problem " + p.name);
  }
  const int n = p.dim;
  Mat H = Mat::Zero(p.x_size(), p.x_size());
  for (int i = 0; i < p.num_agents(); ++i) {
    const Vec xi = block(s.x, i, n);
    auto Hi = H.block(Eigen::Index(i) * n, Eigen::Index(i) * n, n, n);
    Hi = p.agents[i].objective.hessian(xi);
    if (int k = p.mu_index[i]; k >= 0) {
      const auto& h = *p.agents[i].constraint;
      const Mat Hh = h.hessian(xi);
      Hi += s.mu(k) * Hh;
      if (c != 0.0) {
        const Vec gh = h.gradient(xi);
        Hi += c * (h.value(xi) * Hh + gh * gh.transpose());
      }
    }
  }
  if (c != 0.0) H += c * p.L_lift;
  return H;
}

double KktResidual::total() const {
  return std::sqrt(stationarity * stationarity + constraint * constraint + consensus * consensus);
}

KktResidual kkt_residual(const LiftedProblem& p, const MultiplierState& s) {
  check_dimensions(p, s);
  const Mat G = lifted_constraint_jacobian(p, s.x);
  KktResidual r;
  r.stationarity =
      (lifted_objective_gradient(p, s.x) + G * s.mu + p.S_lift.transpose() * s.lambda).norm();
  r.constraint = lifted_constraints(p, s.x).norm();
  r.consensus = (p.S_lift * s.x).norm();
  return r;
}

double relative_error(const Vec& a, const Vec& b) {
  const double denom = std::max({a.norm(), b.norm(), 1e-8});
  return (a - b).norm() / denom;
}

namespace {

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = 1e-6 * (1.0 + std::abs(x(k)));
    xp(k) = x(k) + h;
    const double fp = f(xp);
    xp(k) = x(k) - h;
    const double fm = f(xp);
    xp(k) = x(k);
    g(k) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Mat fd_hessian(const std::function<Vec(const Vec&)>& grad, const Vec& x) {
  const Eigen::Index n = x.size();
  Mat H(n, n);
  Vec xp = x;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = 1e-6 * (1.0 + std::abs(x(k)));
    xp(k) = x(k) + h;
    const Vec gp = grad(xp);
    xp(k) = x(k) - h;
    const Vec gm = grad(xp);
    xp(k) = x(k);
    H.col(k) = (gp - gm) / (2.0 * h);
  }
  return H;
}

double matrix_relative_error(const Mat& A, const Mat& B) {
  const double denom = std::max({A.norm(), B.norm(), 1e-8});
  return (A - B).norm() / denom;
}

}  // namespace

GradientCheckReport check_gradients(const LiftedProblem& p, int samples, unsigned long long seed,
                                    double box, double failure_threshold) {
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, "check_gradients needs samples >= 1");
  GradientCheckReport rep;
  rep.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-box, box);

  auto record = [&](double err, int agent, const std::string& what, double& slot) {
    if (err > slot) {
      slot = err;
      if (&slot == &rep.max_rel_error) rep.worst_agent = agent;
    }
    if (err > failure_threshold) {
      std::ostringstream msg;
      msg << "agent " << agent + 1 << " " << what << ": relative error " << err;
      rep.failures.push_back(msg.str());
    }
  };

  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < p.num_agents(); ++i) {
      Vec x(p.dim);
      for (int k = 0; k < p.dim; ++k) x(k) = unif(rng);
      const auto& a = p.agents[i];
      record(relative_error(a.objective.gradient(x), fd_gradient(a.objective.value, x)), i,
             "objective gradient", rep.max_rel_error);
      if (a.objective.has_hessian()) {
        record(matrix_relative_error(a.objective.hessian(x), fd_hessian(a.objective.gradient, x)), i,
               "objective Hessian", rep.max_hessian_rel_error);
      }
      if (a.constraint) {
        record(relative_error(a.constraint->gradient(x), fd_gradient(a.constraint->value, x)), i,
               "constraint gradient", rep.max_rel_error);
        if (a.constraint->has_hessian()) {
          record(matrix_relative_error(a.constraint->hessian(x),
                                       fd_hessian(a.constraint->gradient, x)),
                 i, "constraint Hessian", rep.max_hessian_rel_error);
        }
      }
    }
  }
  return rep;
}

}  // namespace lagnet
