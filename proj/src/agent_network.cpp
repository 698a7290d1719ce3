#include "lagnet/agent_network.hpp"

#include <algorithm>
#include <thread>

#include "lagnet/error.hpp"

namespace lagnet {

namespace {

// s (x_a - x_b) for the pair (a, b), accumulated in ascending agent order to match the
// row-by-row product S x.
Vec pair_residual(int a, const Vec& xa, int b, const Vec& xb, double s) {
  Vec e = Vec::Zero(xa.size());
  if (a < b) {
    e += s * xa;
    e += (-s) * xb;
  } else {
    e += (-s) * xb;
    e += s * xa;
  }
  return e;
}

}  // namespace

std::vector<Vec> local_pair_residuals(const AgentState& self,
                                      std::span<const NeighborMessage> inbox) {
  std::vector<Vec> out;
  out.reserve(self.neighbors.size());
  for (std::size_t k = 0; k < self.neighbors.size(); ++k) {
    const int j = self.neighbors[k];
    auto it = std::find_if(inbox.begin(), inbox.end(),
                           [j](const NeighborMessage& m) { return m.from == j; });
    if (it == inbox.end()) throw Error(ErrorKind::Topology, "missing message from a neighbor");
    out.push_back(pair_residual(self.id, self.x, j, it->x, self.out_weights[k]));
  }
  return out;
}

Vec local_gradient(const LocalProblem& prob, const AgentState& self,
                   std::span<const NeighborMessage> inbox, double c) {
  const Eigen::Index n = self.x.size();
  const int i = self.id;

  Vec g = prob.objective.gradient(self.x);
  Vec gh;
  Vec t = Vec::Zero(n);
  if (prob.constraint) {
    gh = prob.constraint->gradient(self.x);
    t += gh * (*self.mu);
  }
  g = g + t;

  // Incident pairs in global row order: (j, i) for j < i, then (i, j), then (j, i) for j > i.
  Vec acc = Vec::Zero(n);
  for (const auto& m : inbox)
    if (m.from < i) acc += (-m.weight) * m.lambda;
  for (std::size_t k = 0; k < self.neighbors.size(); ++k) acc += self.out_weights[k] * self.lambda_out[k];
  for (const auto& m : inbox)
    if (m.from > i) acc += (-m.weight) * m.lambda;
  g = g + acc;

  if (c != 0.0) {
    Vec t3 = Vec::Zero(n);
    if (prob.constraint) t3 += gh * prob.constraint->value(self.x);
    g = g + c * t3;

    Vec acc2 = Vec::Zero(n);
    for (const auto& m : inbox)
      if (m.from < i) acc2 += (-m.weight) * pair_residual(m.from, m.x, i, self.x, m.weight);
    for (std::size_t k = 0; k < self.neighbors.size(); ++k) {
      const int j = self.neighbors[k];
      auto it = std::find_if(inbox.begin(), inbox.end(),
                             [j](const NeighborMessage& m) { return m.from == j; });
      acc2 += self.out_weights[k] * pair_residual(i, self.x, j, it->x, self.out_weights[k]);
    }
    for (const auto& m : inbox)
      if (m.from > i) acc2 += (-m.weight) * pair_residual(m.from, m.x, i, self.x, m.weight);
    g = g + c * acc2;
  }
  return g;
}

AgentNetwork::AgentNetwork(const LiftedProblem& p, int threads)
    : p_(&p), threads_(std::max(1, threads)) {
  const int N = p.num_agents();
  agents_.resize(N);
  inbox_.resize(N);
  for (int i = 0; i < N; ++i) {
    agents_[i].id = i;
    agents_[i].x = Vec::Zero(p.dim);
    if (p.mu_index[i] >= 0) agents_[i].mu = 0.0;
  }
  for (const auto& [a, b] : p.incidence.row_order) {
    agents_[a].neighbors.push_back(b);
    agents_[a].out_weights.push_back(0.0);
    agents_[a].lambda_out.push_back(Vec::Zero(p.dim));
  }
  for (const auto& e : p.graph.weights) {
    auto& ag = agents_[e.from];
    auto pos = std::find(ag.neighbors.begin(), ag.neighbors.end(), e.to) - ag.neighbors.begin();
    ag.out_weights[pos] = e.weight;
  }
}

void AgentNetwork::load(const MultiplierState& s) {
  check_dimensions(*p_, s);
  const int n = p_->dim;
  Eigen::Index r = 0;
  for (auto& ag : agents_) {
    ag.x = s.x.segment(Eigen::Index(ag.id) * n, n);
    if (ag.mu) ag.mu = s.mu(p_->mu_index[ag.id]);
    // Rows of agent i are contiguous in lexicographic order.
    for (auto& l : ag.lambda_out) {
      l = s.lambda.segment(r * n, n);
      ++r;
    }
  }
}

MultiplierState AgentNetwork::gather() const {
  MultiplierState s = zero_state(*p_);
  const int n = p_->dim;
  Eigen::Index r = 0;
  for (const auto& ag : agents_) {
    s.x.segment(Eigen::Index(ag.id) * n, n) = ag.x;
    if (ag.mu) s.mu(p_->mu_index[ag.id]) = *ag.mu;
    for (const auto& l : ag.lambda_out) {
      s.lambda.segment(r * n, n) = l;
      ++r;
    }
  }
  return s;
}

void AgentNetwork::deliver() {
  for (auto& box : inbox_) box.clear();
  for (const auto& ag : agents_) {
    for (std::size_t k = 0; k < ag.neighbors.size(); ++k) {
      inbox_[ag.neighbors[k]].push_back({ag.id, ag.x, ag.lambda_out[k], ag.out_weights[k]});
    }
  }
}

template <typename F>
void AgentNetwork::for_each_agent(F&& f) {
  const int N = static_cast<int>(agents_.size());
  const int T = std::min(threads_, N);
  if (T <= 1) {
    for (int i = 0; i < N; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(T);
  for (int t = 0; t < T; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < N; i += T) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

void AgentNetwork::primal_dual_round(double alpha, double c) {
  deliver();
  std::vector<AgentState> next(agents_.size());
  for_each_agent([&](int i) {
    const AgentState& self = agents_[i];
    const LocalProblem& prob = p_->agents[i];
    std::span<const NeighborMessage> inbox(inbox_[i]);
    AgentState out = self;
    const Vec g = local_gradient(prob, self, inbox, c);
    out.x = self.x - alpha * g;
    if (self.mu) out.mu = *self.mu + alpha * prob.constraint->value(self.x);
    const auto e = local_pair_residuals(self, inbox);
    for (std::size_t k = 0; k < e.size(); ++k) out.lambda_out[k] = self.lambda_out[k] + alpha * e[k];
    next[i] = std::move(out);
  });
  agents_ = std::move(next);
}

Vec AgentNetwork::evaluate_gradients(double c) {
  deliver();
  const int n = p_->dim;
  gradients_.assign(agents_.size(), Vec());
  for_each_agent([&](int i) {
    gradients_[i] =
        local_gradient(p_->agents[i], agents_[i], std::span<const NeighborMessage>(inbox_[i]), c);
  });
  Vec stacked(p_->x_size());
  for (std::size_t i = 0; i < agents_.size(); ++i) stacked.segment(Eigen::Index(i) * n, n) = gradients_[i];
  return stacked;
}

void AgentNetwork::descend(double alpha) {
  if (gradients_.size() != agents_.size()) {
    throw Error(ErrorKind::InvalidArgument, "descend called before evaluate_gradients");
  }
  for_each_agent([&](int i) { agents_[i].x = agents_[i].x - alpha * gradients_[i]; });
  gradients_.clear();
}

void AgentNetwork::multiplier_round(double c) {
  deliver();
  std::vector<AgentState> next(agents_.size());
  for_each_agent([&](int i) {
    const AgentState& self = agents_[i];
    AgentState out = self;
    if (self.mu) out.mu = *self.mu + c * p_->agents[i].constraint->value(self.x);
    const auto e = local_pair_residuals(self, std::span<const NeighborMessage>(inbox_[i]));
    for (std::size_t k = 0; k < e.size(); ++k) out.lambda_out[k] = self.lambda_out[k] + c * e[k];
    next[i] = std::move(out);
  });
  agents_ = std::move(next);
}

}  // namespace lagnet
