#include "coopstab/graph_topology.hpp"

#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace coopstab {

LeaderDigraph::LeaderDigraph(Eigen::MatrixXi adjacency) : adjacency_(std::move(adjacency)) {
  if (adjacency_.rows() != adjacency_.cols() || adjacency_.rows() < 2) {
    throw std::invalid_argument("adjacency must be (N+1)x(N+1) with N >= 1");
  }
  for (Eigen::Index i = 0; i < adjacency_.rows(); ++i) {
    if (adjacency_(i, i) != 0) throw std::invalid_argument("adjacency diagonal must be zero");
    for (Eigen::Index j = 0; j < adjacency_.cols(); ++j) {
      const int a = adjacency_(i, j);
      if (a != 0 && a != 1) {
        throw std::invalid_argument("adjacency entries must be 0 or 1 (weighted graphs rejected)");
      }
    }
  }
}

LeaderDigraph LeaderDigraph::from_real(const Eigen::MatrixXd& adjacency) {
  Eigen::MatrixXi a(adjacency.rows(), adjacency.cols());
  for (Eigen::Index i = 0; i < adjacency.rows(); ++i) {
    for (Eigen::Index j = 0; j < adjacency.cols(); ++j) {
      const double v = adjacency(i, j);
      if (v != 0.0 && v != 1.0) {
        throw std::invalid_argument("adjacency entries must be 0 or 1 (weighted graphs rejected)");
      }
      a(i, j) = static_cast<int>(v);
    }
  }
  return LeaderDigraph(std::move(a));
}

Eigen::MatrixXd build_h_matrix_weighted(const Eigen::MatrixXd& weights) {
  if (weights.rows() != weights.cols() || weights.rows() < 2) {
    throw std::invalid_argument("weights must be (N+1)x(N+1) with N >= 1");
  }
  const Eigen::Index n = weights.rows() - 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 1; i <= n; ++i) {
    double degree = 0.0;
    for (Eigen::Index j = 0; j <= n; ++j) {
      if (j == i) continue;
      degree += weights(i, j);
      if (j >= 1) h(i - 1, j - 1) = -weights(i, j);
    }
    h(i - 1, i - 1) = degree;
  }
  return h;
}

Eigen::MatrixXd build_h_matrix(const LeaderDigraph& graph) {
  return build_h_matrix_weighted(graph.adjacency().cast<double>());
}

std::vector<bool> leader_reachable(const LeaderDigraph& graph) {
  const auto& a = graph.adjacency();
  const Eigen::Index nodes = a.rows();
  std::vector<bool> seen(static_cast<std::size_t>(nodes), false);
  std::deque<Eigen::Index> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    const Eigen::Index j = queue.front();
    queue.pop_front();
    // Edge (j, i) exists iff a(i, j) = 1. Nothing flows into the leader.
    for (Eigen::Index i = 1; i < nodes; ++i) {
      if (!seen[i] && a(i, j) == 1) {
        seen[i] = true;
        queue.push_back(i);
      }
    }
  }
  return seen;
}

TopologySet TopologySet::from_graphs(std::vector<LeaderDigraph> graphs) {
  if (graphs.empty()) throw std::invalid_argument("topology set is empty");
  TopologySet set;
  for (const auto& g : graphs) {
    if (g.followers() != graphs.front().followers()) {
      throw std::invalid_argument("dimension mismatch across topology members");
    }
    set.h_.push_back(build_h_matrix(g));
  }
  set.graphs_ = std::move(graphs);
  return set;
}

TopologySet TopologySet::from_matrices(std::vector<Eigen::MatrixXd> h_matrices) {
  if (h_matrices.empty()) throw std::invalid_argument("topology set is empty");
  for (const auto& h : h_matrices) {
    if (h.rows() != h.cols() || h.rows() != h_matrices.front().rows() || h.rows() == 0) {
      throw std::invalid_argument("dimension mismatch across topology members");
    }
  }
  TopologySet set;
  set.h_ = std::move(h_matrices);
  return set;
}

const Eigen::MatrixXd& TopologySet::matrix(int p) const {
  if (p < 1 || p > size()) throw std::out_of_range("topology index out of range");
  return h_[static_cast<std::size_t>(p - 1)];
}

TopologyValidation validate_topology_set(const TopologySet& set, double tol, std::uint64_t seed) {
  if (set.size() == 0) throw std::invalid_argument("topology set is empty");
  for (const auto& h : set.matrices()) {
    if (h.rows() != set.followers() || h.cols() != set.followers()) {
      throw std::invalid_argument("dimension mismatch across topology members");
    }
  }
  TopologyValidation out;
  for (int p = 1; p <= set.size(); ++p) {
    if (set.has_graphs()) {
      const auto seen = leader_reachable(set.graphs()[static_cast<std::size_t>(p - 1)]);
      for (std::size_t i = 1; i < seen.size(); ++i) {
        if (!seen[i]) {
          out.diagnostics.push_back(
              {p, static_cast<int>(i), "node " + std::to_string(i) + " not reachable from leader"});
        }
      }
    }
    const MMatrixCheck check = is_m_matrix(set.matrix(p), tol);
    if (!check.is_m_matrix) {
      for (const auto& d : check.diagnostics) out.diagnostics.push_back({p, -1, d});
      continue;
    }
    try {
      CertificateOptions opts;
      opts.tol = tol;
      opts.seed = seed + static_cast<std::uint64_t>(p);
      out.certificates.push_back(synthesize_diagonal_certificate(set.matrix(p), opts));
    } catch (const std::exception& ex) {
      out.diagnostics.push_back({p, -1, ex.what()});
    }
  }
  return out;
}

}  // namespace coopstab
