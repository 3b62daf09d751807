#include "coopstab/closed_loop.hpp"

#include <stdexcept>
#include <string>

namespace coopstab {

ClosedLoopSystem::ClosedLoopSystem(std::vector<AgentModel> agents, TopologySet topology,
                                   SwitchedController controller, SwitchingSignal signal,
                                   DisturbanceBox disturbance)
    : agents_(std::move(agents)),
      topology_(std::move(topology)),
      controller_(std::move(controller)),
      signal_(std::move(signal)),
      disturbance_(std::move(disturbance)) {
  const int n = followers();
  if (n == 0) throw std::invalid_argument("closed loop needs at least one follower");
  if (topology_.followers() != n)
    throw std::invalid_argument("topology has " + std::to_string(topology_.followers()) +
                                " followers, agents list has " + std::to_string(n));
  if (controller_.agents() != n)
    throw std::invalid_argument("controller has " + std::to_string(controller_.agents()) +
                                " omegas for " + std::to_string(n) + " followers");
  if (signal_.max_value() > topology_.size())
    throw std::invalid_argument("switching signal refers to topology " +
                                std::to_string(signal_.max_value()) + " but only " +
                                std::to_string(topology_.size()) + " exist");
  int z = 0;
  int d = 0;
  for (const auto& a : agents_) {
    z_offsets_.push_back(z);
    d_offsets_.push_back(d);
    z += a.nz();
    d += a.nd();
  }
  if (d != disturbance_.dim())
    throw std::invalid_argument("agents need " + std::to_string(d) +
                                " disturbance components, box has " +
                                std::to_string(disturbance_.dim()));
  z_total_ = z;
  state_dim_ = z + n;
}

void ClosedLoopSystem::rhs_frozen(int p, const Eigen::VectorXd& d, const Eigen::VectorXd& x,
                                  Eigen::VectorXd& dx) const {
  const int n = followers();
  dx.resize(state_dim_);
  const Eigen::VectorXd e = e_block(x);
  const Eigen::VectorXd u = controller_.evaluate(topology_.matrix(p) * e);
  for (int i = 0; i < n; ++i) {
    const auto& a = agents_[i];
    const Eigen::VectorXd zi = z_block(x, i);
    const Eigen::VectorXd di = d_block(d, i);
    if (a.nz() > 0) dx.segment(z_offsets_[i], a.nz()) = a.f(zi, e(i), di);
    dx(e_index(i)) = a.e_dot(zi, e(i), di, u(i));
  }
}

Eigen::VectorXd closed_loop_rhs(const ClosedLoopSystem& system, double t, const Eigen::VectorXd& x) {
  if (x.size() != system.state_dim()) throw std::invalid_argument("state dimension mismatch");
  Eigen::VectorXd dx;
  system.rhs_frozen(system.signal().value_at(t), system.disturbance().value_at(t), x, dx);
  return dx;
}

}  // namespace coopstab
