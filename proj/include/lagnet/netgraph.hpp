#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace lagnet {

/// One directed entry (i, j, s_ij) of the neighbor weight list. Indices are 0-based.
struct DirectedWeight {
  int from = 0;
  int to = 0;
  double weight = 0.0;
};

struct GraphSpec {
  int num_agents = 0;
  std::vector<DirectedWeight> weights;
};

struct IncidenceMatrix {
  Eigen::MatrixXd S;
  /// (i, j) pairs in lexicographic order; row r of S belongs to row_order[r].
  std::vector<std::pair<int, int>> row_order;
};

struct Projector {
  Eigen::MatrixXd J;
  Eigen::MatrixXd U;
};

/**
 * Builds S with one row per ordered neighbor pair (i, j): +s_ij in column i,
 * -s_ij in column j. Throws on asymmetric edge presence, self loops,
 * duplicate entries or non-positive weights.
 */
IncidenceMatrix build_incidence(const GraphSpec& spec);

Eigen::MatrixXd laplacian(const IncidenceMatrix& inc);

/// A ⊗ I_n.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron_lift(
    const Eigen::MatrixBase<Derived>& A, Eigen::Index n) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(A.rows() * n, A.cols() * n);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (A(i, j) != Scalar(0)) {
        out.block(i * n, j * n, n, n).diagonal().setConstant(A(i, j));
      }
    }
  }
  return out;
}

/// Orthogonal projector onto Null(S'), from an SVD with relative tolerance 1e-10.
Projector nullspace_projector(const IncidenceMatrix& inc);

bool check_connected(const GraphSpec& spec);

/// Orthonormal basis of Range(S) (the complement of Null(S') in R^{N̄}).
Eigen::MatrixXd range_basis(const IncidenceMatrix& inc);

/// Orthonormal basis for the null space of A using SVD and tolerance rel_tol * σ_max.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& A, double rel_tol = 1e-10);

/// Convenience constructors.
GraphSpec path_graph(int num_agents, double weight = 1.0);
GraphSpec complete_graph(int num_agents, double weight = 1.0);

}  // namespace lagnet
