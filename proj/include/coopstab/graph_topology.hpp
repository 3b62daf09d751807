#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coopstab/mmatrix.hpp"

namespace coopstab {

/// Leader-follower digraph on nodes {0 (leader), 1..N}. adjacency(i, j) = 1
/// iff node i receives information from node j. Row 0 is ignored: the
/// leader takes no input.
class LeaderDigraph {
 public:
  /// Throws std::invalid_argument unless the matrix is square, of size at
  /// least 2, binary, and has a zero diagonal.
  explicit LeaderDigraph(Eigen::MatrixXi adjacency);
  static LeaderDigraph from_real(const Eigen::MatrixXd& adjacency);

  int followers() const { return static_cast<int>(adjacency_.rows()) - 1; }
  const Eigen::MatrixXi& adjacency() const { return adjacency_; }

 private:
  Eigen::MatrixXi adjacency_;
};

/// h_ii = sum_{j=0}^N a_ij, h_ij = -a_ij for followers i != j.
Eigen::MatrixXd build_h_matrix(const LeaderDigraph& graph);

/// Same entry formula on an arbitrary nonnegative weight matrix. Used for
/// linearity checks; production graphs go through LeaderDigraph.
Eigen::MatrixXd build_h_matrix_weighted(const Eigen::MatrixXd& weights);

/// reachable[i] is true iff a directed path 0 -> ... -> i exists. The vector
/// has N + 1 entries and reachable[0] is always true.
std::vector<bool> leader_reachable(const LeaderDigraph& graph);

/// The family {H_p}, p = 1..n0, either derived from graphs or given directly.
class TopologySet {
 public:
  static TopologySet from_graphs(std::vector<LeaderDigraph> graphs);
  static TopologySet from_matrices(std::vector<Eigen::MatrixXd> h_matrices);

  int size() const { return static_cast<int>(h_.size()); }
  int followers() const { return h_.empty() ? 0 : static_cast<int>(h_.front().rows()); }
  /// p is 1-based.
  const Eigen::MatrixXd& matrix(int p) const;
  const std::vector<Eigen::MatrixXd>& matrices() const { return h_; }
  bool has_graphs() const { return !graphs_.empty(); }
  const std::vector<LeaderDigraph>& graphs() const { return graphs_; }

 private:
  std::vector<Eigen::MatrixXd> h_;
  std::vector<LeaderDigraph> graphs_;
};

struct TopologyDiagnostic {
  int p = 0;  // 1-based member index
  int node = -1;  // offending follower, when applicable
  std::string reason;
};

struct TopologyValidation {
  std::vector<MMatrixCertificate> certificates;  // one per p when ok()
  std::vector<TopologyDiagnostic> diagnostics;
  bool ok() const { return diagnostics.empty(); }
};

/// Leader reachability (for graph-specified members) and an M-matrix
/// certificate for every H_p. Throws std::invalid_argument on mixed sizes.
TopologyValidation validate_topology_set(const TopologySet& set, double tol = kEigenTol,
                                         std::uint64_t seed = 1);

}  // namespace coopstab
