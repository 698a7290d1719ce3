#include "lagnet/netgraph.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <sstream>

#include <Eigen/SVD>

#include "lagnet/error.hpp"

namespace lagnet {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Topology: return "topology";
    case ErrorKind::Weight: return "weight";
    case ErrorKind::DisconnectedGraph: return "disconnected-graph";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Capability: return "capability";
    case ErrorKind::NotStationary: return "not-a-stationary-point";
    case ErrorKind::Certification: return "certification";
    case ErrorKind::HypothesisViolated: return "hypothesis-violated";
    case ErrorKind::Assumption2: return "constraint-rank";
    case ErrorKind::NeedLargerPenalty: return "need-larger-c";
    case ErrorKind::InnerDivergence: return "inner-divergence";
    case ErrorKind::InconsistentSystem: return "inconsistent-system";
    case ErrorKind::Oracle: return "oracle";
    case ErrorKind::Config: return "config";
    case ErrorKind::HashMismatch: return "hash-mismatch";
    case ErrorKind::InsufficientData: return "insufficient-data";
  }
  return "unknown";
}

IncidenceMatrix build_incidence(const GraphSpec& spec) {
  const int N = spec.num_agents;
  if (N <= 0) throw Error(ErrorKind::Topology, "graph needs at least one agent");

  std::map<std::pair<int, int>, double> w;
  for (const auto& e : spec.weights) {
    if (e.from < 0 || e.from >= N || e.to < 0 || e.to >= N) {
      std::ostringstream msg;
      msg << "edge (" << e.from + 1 << ", " << e.to + 1 << ") references an agent outside 1.." << N;
      throw Error(ErrorKind::Topology, msg.str());
    }
    if (e.from == e.to) {
      throw Error(ErrorKind::Topology, "self loop at agent " + std::to_string(e.from + 1));
    }
    if (!(e.weight > 0.0)) {
      std::ostringstream msg;
      msg << "weight s_" << e.from + 1 << e.to + 1 << " = " << e.weight << " must be positive";
      throw Error(ErrorKind::Weight, msg.str());
    }
    if (!w.emplace(std::make_pair(e.from, e.to), e.weight).second) {
      std::ostringstream msg;
      msg << "duplicate entry for pair (" << e.from + 1 << ", " << e.to + 1 << ")";
      throw Error(ErrorKind::Topology, msg.str());
    }
  }
  for (const auto& [key, value] : w) {
    if (!w.count({key.second, key.first})) {
      std::ostringstream msg;
      msg << "pair (" << key.first + 1 << ", " << key.second + 1 << ") has no reverse entry ("
          << key.second + 1 << ", " << key.first + 1 << ")";
      throw Error(ErrorKind::Topology, msg.str());
    }
  }

  IncidenceMatrix inc;
  inc.S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(w.size()), N);
  Eigen::Index r = 0;
  // std::map iterates in lexicographic (i, j) order.
  for (const auto& [key, s] : w) {
    inc.S(r, key.first) = s;
    inc.S(r, key.second) = -s;
    inc.row_order.push_back(key);
    ++r;
  }
  return inc;
}

Eigen::MatrixXd laplacian(const IncidenceMatrix& inc) { return inc.S.transpose() * inc.S; }

Eigen::MatrixXd null_space(const Eigen::MatrixXd& A, double rel_tol) {
  const Eigen::Index cols = A.cols();
  if (A.rows() == 0) return Eigen::MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * smax && sv(i) > 0.0) ++rank;
  }
  return svd.matrixV().rightCols(cols - rank);
}

static Eigen::Index numeric_rank(const Eigen::MatrixXd& A, double rel_tol) {
  return A.cols() - null_space(A, rel_tol).cols();
}

Projector nullspace_projector(const IncidenceMatrix& inc) {
  const Eigen::Index N = inc.S.cols();
  const Eigen::Index rank = numeric_rank(inc.S, 1e-10);
  if (rank != N - 1) {
    throw Error(ErrorKind::DisconnectedGraph,
                "incidence matrix has rank " + std::to_string(rank) + ", expected " +
                    std::to_string(N - 1) + " for a connected graph");
  }
  Projector P;
  P.U = null_space(inc.S.transpose(), 1e-10);
  P.J = P.U * P.U.transpose();
  return P;
}

Eigen::MatrixXd range_basis(const IncidenceMatrix& inc) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(inc.S, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-10 * smax && sv(i) > 0.0) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

bool check_connected(const GraphSpec& spec) {
  const int N = spec.num_agents;
  if (N <= 0) return false;
  std::vector<std::vector<int>> adj(N);
  for (const auto& e : spec.weights) {
    if (e.from < 0 || e.from >= N || e.to < 0 || e.to >= N) continue;
    adj[e.from].push_back(e.to);
    adj[e.to].push_back(e.from);
  }
  std::vector<bool> seen(N, false);
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  int visited = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++visited;
        q.push(v);
      }
    }
  }
  return visited == N;
}

GraphSpec path_graph(int num_agents, double weight) {
  GraphSpec g;
  g.num_agents = num_agents;
  for (int i = 0; i + 1 < num_agents; ++i) {
    g.weights.push_back({i, i + 1, weight});
    g.weights.push_back({i + 1, i, weight});
  }
  return g;
}

GraphSpec complete_graph(int num_agents, double weight) {
  GraphSpec g;
  g.num_agents = num_agents;
  for (int i = 0; i < num_agents; ++i)
    for (int j = 0; j < num_agents; ++j)
      if (i != j) g.weights.push_back({i, j, weight});
  return g;
}

}  // namespace lagnet
