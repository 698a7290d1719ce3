#pragma once

#include "lagnet/problem.hpp"
#include "lagnet/trace.hpp"

namespace lagnet {

enum class Algorithm { A1, A2, A3 };
enum class Execution { Stacked, Message };

const char* to_string(Algorithm a);

struct FirstOrderConfig {
  Algorithm algorithm = Algorithm::A1;
  double alpha = 0.0;
  double c = 0.0;
  long max_iter = 10000;
  double tol = 1e-10;
  Execution execution = Execution::Stacked;
  int threads = 1;
  /// Iterate norm beyond which a run is declared diverged.
  double divergence_norm = 1e8;
  /// Keep every trace_stride-th iterate in the trace (the last one is always kept).
  long trace_stride = 1;
};

struct SolverResult {
  RunStatus status = RunStatus::IterationCap;
  long iterations = 0;
  MultiplierState final_state;
  Trace trace;
};

/// Per-agent A1 round through the neighbor-message interface.
MultiplierState step_a1(const LiftedProblem& p, const MultiplierState& s, double alpha);
/// Per-agent A2 round; c = 0 reproduces step_a1 exactly.
MultiplierState step_a2(const LiftedProblem& p, const MultiplierState& s, double alpha, double c);

/// ∇F + ∇h μ + S'λ (+ c ∇h h + c S'S x) with whole-vector algebra.
Vec stacked_gradient(const LiftedProblem& p, const MultiplierState& s, double c);

/// Whole-vector form of the same round (c = 0 for A1).
MultiplierState stacked_step(const LiftedProblem& p, const MultiplierState& s, double alpha,
                             double c);

SolverResult run_first_order(const LiftedProblem& p, const FirstOrderConfig& config,
                             const MultiplierState& init);

double state_norm(const MultiplierState& s);
bool state_finite(const MultiplierState& s);

TraceRecord make_record(const LiftedProblem& p, int k, const MultiplierState& s);

}  // namespace lagnet
