#pragma once

#include <vector>

#include <Eigen/Dense>

#include "coopstab/controller.hpp"
#include "coopstab/dynamics.hpp"
#include "coopstab/graph_topology.hpp"
#include "coopstab/switching.hpp"

namespace coopstab {

/// The switched closed loop dx_c/dt = f_{c,sigma(t)}(x_c, d(t)).
///
/// State layout: x_c = (Z_1, ..., Z_N, e_1, ..., e_N). Agent i reads the
/// slice of d(t) that starts at the sum of the preceding agents' nd().
/// Immutable after construction.
class ClosedLoopSystem {
 public:
  /// Throws std::invalid_argument when N disagrees across members, the
  /// stacked disturbance dimension does not match, or the signal refers to
  /// a topology index outside 1..n0.
  ClosedLoopSystem(std::vector<AgentModel> agents, TopologySet topology,
                   SwitchedController controller, SwitchingSignal signal,
                   DisturbanceBox disturbance);

  int followers() const { return static_cast<int>(agents_.size()); }
  int state_dim() const { return state_dim_; }
  int z_offset(int i) const { return z_offsets_[i]; }
  int e_index(int i) const { return z_total_ + i; }

  const std::vector<AgentModel>& agents() const { return agents_; }
  const TopologySet& topology() const { return topology_; }
  const SwitchedController& controller() const { return controller_; }
  const SwitchingSignal& signal() const { return signal_; }
  const DisturbanceBox& disturbance() const { return disturbance_; }

  /// Time-invariant field for a frozen topology index p and disturbance d.
  void rhs_frozen(int p, const Eigen::VectorXd& d, const Eigen::VectorXd& x,
                  Eigen::VectorXd& dx) const;

  Eigen::VectorXd z_block(const Eigen::VectorXd& x, int i) const {
    return x.segment(z_offsets_[i], agents_[i].nz());
  }
  Eigen::VectorXd e_block(const Eigen::VectorXd& x) const {
    return x.segment(z_total_, followers());
  }
  Eigen::VectorXd d_block(const Eigen::VectorXd& d, int i) const {
    return d.segment(d_offsets_[i], agents_[i].nd());
  }

 private:
  std::vector<AgentModel> agents_;
  TopologySet topology_;
  SwitchedController controller_;
  SwitchingSignal signal_;
  DisturbanceBox disturbance_;
  std::vector<int> z_offsets_;
  std::vector<int> d_offsets_;
  int z_total_ = 0;
  int state_dim_ = 0;
};

/// Evaluates p = sigma(t), e_v = H_p e, u_bar = controller(e_v) and stacks
/// the agent derivatives.
Eigen::VectorXd closed_loop_rhs(const ClosedLoopSystem& system, double t,
                                const Eigen::VectorXd& x);

}  // namespace coopstab
