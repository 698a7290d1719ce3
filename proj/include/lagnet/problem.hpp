#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "lagnet/netgraph.hpp"

namespace lagnet {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SparseRowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// A smooth function R^n -> R with analytic derivatives. The Hessian is optional.
struct ScalarFunction {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;

  bool has_hessian() const { return static_cast<bool>(hessian); }
};

struct LocalProblem {
  ScalarFunction objective;
  std::optional<ScalarFunction> constraint;
};

struct MultiplierState {
  Vec x;
  Vec mu;
  Vec lambda;
};

/**
 * The consensus-lifted problem: minimize Σ f_i(x_i) subject to h_i(x_i) = 0 for the
 * agents that carry a constraint and S x = 0. Graph objects are derived once at
 * construction.
 */
struct LiftedProblem {
  std::string name;
  int dim = 0;
  std::vector<LocalProblem> agents;
  GraphSpec graph;
  IncidenceMatrix incidence;
  Mat L;
  Projector projector;

  Mat S_lift;
  Mat L_lift;
  Mat J_lift;
  SparseRowMat S_sparse;
  SparseRowMat St_sparse;

  /// Agent index -> position in μ, or -1 for unconstrained agents.
  std::vector<int> mu_index;
  /// μ position -> agent index.
  std::vector<int> constrained_agents;

  int num_agents() const { return static_cast<int>(agents.size()); }
  int num_pairs() const { return static_cast<int>(incidence.row_order.size()); }
  int num_constraints() const { return static_cast<int>(constrained_agents.size()); }
  Eigen::Index x_size() const { return Eigen::Index(dim) * num_agents(); }
  Eigen::Index lambda_size() const { return Eigen::Index(dim) * num_pairs(); }
  bool has_hessians() const;
};

LiftedProblem make_lifted_problem(std::string name, int dim, std::vector<LocalProblem> agents,
                                  const GraphSpec& graph);

MultiplierState zero_state(const LiftedProblem& p);
void check_dimensions(const LiftedProblem& p, const MultiplierState& s);

/// 𝟙 ⊗ z.
Vec consensus_vector(const LiftedProblem& p, const Vec& z);

double eval_lifted_objective(const LiftedProblem& p, const Vec& x);
/// Stacked gradient of F.
Vec lifted_objective_gradient(const LiftedProblem& p, const Vec& x);
/// h(x) in R^m.
Vec lifted_constraints(const LiftedProblem& p, const Vec& x);
/// ∇h(x) as an (nN × m) matrix; column k is supported on the block of constrained agent k.
Mat lifted_constraint_jacobian(const LiftedProblem& p, const Vec& x);

/// Centralized pieces at a single x ∈ R^n: Σ f_i, Σ ∇f_i and the m constraint values.
double central_objective(const LiftedProblem& p, const Vec& x);
Vec central_gradient(const LiftedProblem& p, const Vec& x);
Vec central_constraints(const LiftedProblem& p, const Vec& x);
/// n × m matrix [∇h_1(x) ... ∇h_m(x)].
Mat central_constraint_jacobian(const LiftedProblem& p, const Vec& x);

double eval_lagrangian(const LiftedProblem& p, const MultiplierState& s);
double eval_aug_lagrangian(const LiftedProblem& p, const MultiplierState& s, double c);
Vec grad_aug_lagrangian(const LiftedProblem& p, const MultiplierState& s, double c);
Mat hess_aug_lagrangian(const LiftedProblem& p, const MultiplierState& s, double c);

struct KktResidual {
  double stationarity = 0.0;
  double constraint = 0.0;
  double consensus = 0.0;

  double total() const;
};

KktResidual kkt_residual(const LiftedProblem& p, const MultiplierState& s);

struct GradientCheckReport {
  double max_rel_error = 0.0;
  /// Max relative error of Hessians against differenced gradients; 0 when no Hessians exist.
  double max_hessian_rel_error = 0.0;
  int worst_agent = -1;
  int samples = 0;
  std::vector<std::string> failures;
};

/**
 * Compares each agent's analytic gradients (objective and constraint) with central
 * differences, step 1e-6 (1 + |x_k|), at `samples` points drawn from [-box, box]^n.
 * Relative error is ‖g - g_fd‖ / max(‖g‖, ‖g_fd‖, 1e-8).
 */
GradientCheckReport check_gradients(const LiftedProblem& p, int samples, unsigned long long seed,
                                    double box = 1.5, double failure_threshold = 1e-5);

/// Same relative error measure used by check_gradients.
double relative_error(const Vec& a, const Vec& b);

}  // namespace lagnet
