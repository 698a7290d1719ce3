#pragma once

#include <optional>

#include "lagnet/lagrangian_solvers.hpp"

namespace lagnet {

/// Diminishing inner step a / (τ + b).
struct StepSchedule {
  double a = 0.0;
  double b = 1.0;
};

struct MoMConfig {
  double c0 = 1.0;
  double beta = 2.0;
  double c_max = 16.0;
  /// Constant inner step; when neither this nor `inner_schedule` is set, the step is
  /// 1/‖∇²L_c‖ at the warm start, by power iteration.
  std::optional<double> inner_alpha;
  std::optional<StepSchedule> inner_schedule;
  /// Inner tolerance eps0 * gamma^k, floored at tol / 10.
  double eps0 = 1e-2;
  double gamma = 0.5;
  long inner_max_iter = 100000;
  long outer_max_iter = 100;
  double tol = 1e-8;
  Execution execution = Execution::Stacked;
  int threads = 1;
};

void validate(const MoMConfig& config);

double penalty_schedule(const MoMConfig& config, int k);

struct InnerResult {
  Vec x;
  long iterations = 0;
  bool reached_tolerance = false;
  double gradient_norm = 0.0;
  double step = 0.0;
};

/**
 * Gradient descent on x ↦ L_c(x, μ, λ) from the warm start until the gradient norm
 * drops to eps or the iteration cap. Throws ErrorKind::InnerDivergence on a
 * non-finite iterate.
 */
InnerResult inner_minimize(const LiftedProblem& p, const Vec& x_init, const Vec& mu,
                           const Vec& lambda, double c, double eps, const MoMConfig& config);

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power iteration.
double power_iteration_norm(const Mat& A, int max_iter = 500, double rel_tol = 1e-10);

MultiplierState outer_step(const LiftedProblem& p, const MultiplierState& s, double c);

SolverResult run_a3(const LiftedProblem& p, const MoMConfig& config, const MultiplierState& init);

}  // namespace lagnet
