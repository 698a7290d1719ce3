#pragma once

#include <complex>
#include <string>
#include <vector>

#include "lagnet/problem.hpp"

namespace lagnet {

using Complex = std::complex<double>;

struct SpectralCertificate {
  std::string matrix;   // "B", "B_c", "N_c" or "hess_aug"
  Mat value;
  std::vector<Complex> eigenvalues;
  bool verdict = false;
  double alpha_bound = 0.0;
  double rate_bound = 0.0;
};

/// Eigenvalues sorted by real part, then imaginary part.
std::vector<Complex> sorted_eigenvalues(const Mat& A);

/**
 * Jacobian of the transformed first-order map (x, μ, (I-J)λ) at a KKT point, written as
 * I - αB with
 *   B = [ ∇²L_c   ∇h   S' ]
 *       [ -∇h'     0    0 ]
 *       [ -S       0   J/α]
 * Verdict: every eigenvalue has real part above 1e-10 ‖B‖.
 */
SpectralCertificate iteration_matrix_B(const LiftedProblem& p, const MultiplierState& sol,
                                       double alpha, double c);

/// B restricted to (x, μ, z) with z ∈ Range(S); independent of α.
Mat restricted_iteration_matrix(const LiftedProblem& p, const MultiplierState& sol, double c);

struct StepSizeCertificate {
  double alpha_bar = 0.0;
  double rho_at_bound = 0.0;
  /// Step in (0, ᾱ] minimizing the spectral radius, and that radius.
  double alpha_rate = 0.0;
  double rho_rate = 0.0;
  std::vector<Complex> restricted_eigenvalues;
};

double spectral_radius_of_step(const std::vector<Complex>& eigenvalues, double alpha);

/// Bisection (relative width 1e-3) for the largest α with ρ(I - αB) < 1 given the spectrum of B.
StepSizeCertificate certify_from_spectrum(const std::vector<Complex>& eigenvalues,
                                          double alpha_max_search);

StepSizeCertificate certify_step_size(const LiftedProblem& p, const MultiplierState& sol,
                                      double c, double alpha_max_search = 10.0);

double find_cbar(const LiftedProblem& p, const MultiplierState& sol);

struct TangentConeBasis {
  Mat basis;          // n × (n - m), orthonormal
  Mat lifted;         // nN × (n - m), columns 𝟙⊗v / √N
  double sigma_min = 0.0;
};

TangentConeBasis tangent_cone_basis(const LiftedProblem& p, const Vec& x_star);

struct SecondOrderResult {
  bool holds = false;
  double margin = 0.0;
};

SecondOrderResult second_order_check(const LiftedProblem& p, const MultiplierState& sol);

struct MomRateCertificate {
  SpectralCertificate certificate;   // matrix "N_c", value = T N_c T
  std::vector<double> sigma;         // eigenvalues of the restricted Ñ
  std::vector<double> effective_e;   // c σ / (1 - σ), σ ≠ 1
  bool admissible = false;           // c > max(-2 e_i)
  double c = 0.0;
};

/**
 * Predicted asymptotic multiplier contraction of the method of multipliers with
 * penalty c: spectral radius of T N_c T with N_c = I - c ∇h̃' (∇²L_c)⁻¹ ∇h̃,
 * ∇h̃ = [∇h, S'] and T = diag(I, I - J).
 */
MomRateCertificate rate_bound_mom(const LiftedProblem& p, const MultiplierState& sol, double c);

/**
 * The same contraction parameterized by effective eigenvalues: the eigenvalues of
 * (Q'∇h̃'(∇²L_c)⁻¹∇h̃Q)⁻¹ - c I where Q restricts λ to Range(S). Used as an independent
 * route to the e_i of rate_bound_mom.
 */
std::vector<double> effective_eigenvalues_direct(const LiftedProblem& p,
                                                 const MultiplierState& sol, double c);

double dist_to_multiplier_set(const Vec& lambda, const Vec& lambda_star, const Mat& J_lift);

struct RateEstimate {
  double contraction = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// Least-squares fit of log(err_k) against k over the trailing tail_fraction.
RateEstimate estimate_linear_rate(const std::vector<double>& errors, double tail_fraction = 0.5,
                                  int min_records = 20);

/**
 * The iteration map in transformed coordinates z = (x, μ, (I-J)λ) with Jλ held at
 * the value of `anchor`. Its Jacobian at a KKT point is I - αB.
 */
Vec transformed_step(const LiftedProblem& p, const MultiplierState& anchor, const Vec& z,
                     double alpha, double c);
Vec transformed_coordinates(const LiftedProblem& p, const MultiplierState& s);

struct RatioSample {
  double c = 0.0;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
};

/**
 * For η = (μ, λ) sampled within `radius` of η* (λ perturbed inside Range(S)), solves
 * ∇_x L_c(x, η) = 0 by Newton from x* and records c ‖x(η, c) - x*‖ / ‖η - η*‖.
 */
std::vector<RatioSample> sample_solution_ratio(const LiftedProblem& p, const MultiplierState& sol,
                                               const std::vector<double>& c_values, int samples,
                                               double radius, unsigned long long seed);

}  // namespace lagnet
