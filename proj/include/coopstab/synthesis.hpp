#pragma once

#include <vector>

#include <Eigen/Dense>

#include "coopstab/controller.hpp"
#include "coopstab/dynamics.hpp"
#include "coopstab/graph_topology.hpp"
#include "coopstab/lyapunov.hpp"

namespace coopstab {

/// Options for the constructive gain recipe. Every bound it produces is
/// certified on the declared boxes only.
struct NumericSynthesisOptions {
  Box z_box;  // shared by all agents; dimension must match each agent's nz
  double e_lo = -2.0;
  double e_hi = 2.0;
  /// lambda_bar = fraction * lambda / 2, c_bar = lambda / 2 - lambda_bar.
  double lambda_bar_fraction = 0.5;
  BoundSplitOptions split;
  ChooseRhoOptions rho;
  GainSynthesisOptions gain;
  double verify_step = 0.25;
};

struct AgentSynthesis {
  BoundSplit split;
  Polynomial rho_bar;  // rescaling of the agent's exp-ISS function
  Polynomial pi_bar_sq;  // beta_bar(e) = pi_bar_sq(e^2)
  double lambda = 0.0;
  double lambda_bar = 0.0;
  double c_bar = 0.0;
  VerificationReport strong_iss;  // dV_bar/dt <= -(lambda_bar V_bar + c_bar gamma) + beta_bar
};

struct NumericSynthesisResult {
  std::vector<AgentSynthesis> agents;
  std::vector<MMatrixCertificate> certificates;
  GainSynthesisReport gain;
};

/// For each agent: split |G|^2, pick rho_bar so the rescaled exp-ISS function
/// dominates gamma, rescale the supply; then lambda0 = min lambda_bar,
/// c0 = min c_bar, and synthesize (k, omega). Agents must carry
/// IssCertificateData. `disturbance` gives each agent's d-box (sliced in
/// agent order).
NumericSynthesisResult synthesize_numeric(const std::vector<AgentModel>& agents,
                                          const TopologySet& topology,
                                          const DisturbanceBox& disturbance,
                                          const NumericSynthesisOptions& options);

/// Slices of the stacked disturbance box, one vertex list per agent.
std::vector<std::vector<Eigen::VectorXd>> agent_disturbance_vertices(
    const std::vector<AgentModel>& agents, const DisturbanceBox& disturbance);

}  // namespace coopstab
