#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lagnet/problem.hpp"

namespace lagnet {

/// Everything agent i owns: its copy x_i, its multiplier μ_i and the λ_ij on its
/// outgoing pairs, with the weights s_ij it is allowed to know.
struct AgentState {
  int id = 0;
  Vec x;
  std::optional<double> mu;
  std::vector<int> neighbors;        // ascending
  std::vector<double> out_weights;   // s_ij, aligned with neighbors
  std::vector<Vec> lambda_out;       // λ_ij, aligned with neighbors
};

/// What agent j sends to agent i in one round: x_j, λ_ji and s_ji.
struct NeighborMessage {
  int from = 0;
  Vec x;
  Vec lambda;
  double weight = 0.0;
};

/**
 * ∇_{x_i} of the augmented Lagrangian, computed from agent-local data only. Incident
 * pair terms are summed in the global pair order so that the result matches the
 * stacked products bit for bit. Inbox messages must be sorted by sender.
 */
Vec local_gradient(const LocalProblem& prob, const AgentState& self,
                   std::span<const NeighborMessage> inbox, double c);

/// s_ij (x_i - x_j) for each outgoing pair of `self`, aligned with self.neighbors.
std::vector<Vec> local_pair_residuals(const AgentState& self,
                                      std::span<const NeighborMessage> inbox);

/**
 * Synchronous message-passing simulation. Each round every agent publishes one message
 * per neighbor, then updates from its own state and its inbox alone. Rounds are double
 * buffered; agent updates within a round may run on several threads.
 */
class AgentNetwork {
 public:
  explicit AgentNetwork(const LiftedProblem& p, int threads = 1);

  void load(const MultiplierState& s);
  MultiplierState gather() const;

  /// One round of the first-order primal-dual iteration (c = 0 gives the plain Lagrangian).
  void primal_dual_round(double alpha, double c);

  /// Each agent evaluates its block of ∇_x L_c with multipliers held fixed. The stacked
  /// vector is returned for the outside observer (stopping test and tracing only).
  Vec evaluate_gradients(double c);

  /// x_i -= alpha g_i using the gradients from the last evaluate_gradients call.
  void descend(double alpha);

  /// Multiplier update μ_i += c h_i, λ_ij += c s_ij (x_i - x_j); x is left alone.
  void multiplier_round(double c);

  const std::vector<AgentState>& agents() const { return agents_; }

 private:
  void deliver();
  template <typename F>
  void for_each_agent(F&& f);

  const LiftedProblem* p_;
  int threads_;
  std::vector<AgentState> agents_;
  std::vector<std::vector<NeighborMessage>> inbox_;
  std::vector<Vec> gradients_;
};

}  // namespace lagnet
