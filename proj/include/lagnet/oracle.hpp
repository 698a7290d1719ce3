#pragma once

#include <vector>

#include "lagnet/problem.hpp"

namespace lagnet {

struct KktPoint {
  Vec x;
  Vec psi;
  double objective = 0.0;
  double residual = 0.0;
};

struct OracleSolution {
  Vec x_star;
  Vec psi_star;
  double kkt_residual_norm = 0.0;
  double objective = 0.0;
  /// Minimum curvature of the centralized Lagrangian on Null(∇h(x*)'); +inf when that is {0},
  /// NaN when Hessians are unavailable.
  double second_order_margin = 0.0;
  /// Every distinct KKT point found, sorted by objective then lexicographically by x.
  std::vector<KktPoint> candidates;
};

struct OracleOptions {
  int restarts = 8;
  double radius = 1.0;
  unsigned long long seed = 0;
  int max_newton_iter = 200;
  double tol = 1e-10;
};

/**
 * Centralized KKT solve of min Σ f_i(x) s.t. h_i(x) = 0 by damped Newton with a
 * residual-norm line search. Missing Hessians are replaced by differences of the
 * analytic gradients. Throws ErrorKind::Oracle when no start reaches the tolerance.
 */
OracleSolution solve_centralized(const LiftedProblem& p, const Vec& x_init,
                                 const OracleOptions& options = {});

/// (x, μ*, λ*) on the lifted problem with λ* ∈ Range(S).
struct LiftedSolution {
  MultiplierState state;
  /// Residual of the stacked stationarity equation at the returned multipliers.
  double stationarity_residual = 0.0;
};

/**
 * Solves ∇F(1⊗x*) + ∇h μ + S'λ = 0 jointly for (μ, λ) in the minimum-norm sense, which
 * leaves μ free and puts λ in Range(S). μ is therefore recovered independently of ψ*.
 */
LiftedSolution lifted_multipliers(const LiftedProblem& p, const OracleSolution& sol);

struct MinimizerReport {
  double assumption2_sigma_min = 0.0;
  bool assumption2_holds = false;
  std::vector<bool> block_pd;
  bool blockwise_pd = false;
  bool tangent_cone_pd = false;
  double tangent_cone_margin = 0.0;
  bool first_order_plain_certified = false;   // blockwise hypothesis
  bool augmented_certified = false;           // tangent-cone hypothesis
};

MinimizerReport verify_minimizer(const LiftedProblem& p, const OracleSolution& sol);

}  // namespace lagnet
