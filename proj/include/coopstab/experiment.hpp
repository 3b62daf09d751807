#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "coopstab/closed_loop.hpp"
#include "coopstab/regulation.hpp"
#include "coopstab/simulate.hpp"
#include "coopstab/switching.hpp"
#include "coopstab/synthesis.hpp"

namespace coopstab {

struct ControllerSpec {
  std::string mode = "manual";  // "manual" | "numeric"
  double k = 0.0;
  std::vector<Polynomial> omega;  // manual mode, one per agent
  NumericSynthesisOptions numeric;
};

struct LyapunovSpec {
  std::optional<double> lambda0;
  int mu0_samples = 10000;
  double mu0_radius = 5.0;
  /// ISS verification box: |z_k| <= z_bound, |e| <= e_bound, grid step.
  double z_bound = 3.0;
  double e_bound = 2.0;
  double step = 0.1;
};

/// Parsed, defaults-resolved experiment. `effective` is the JSON form of
/// exactly this configuration and reproduces it when parsed again.
struct ExperimentConfig {
  nlohmann::json effective;
  TopologySet topology;
  SwitchingSignal signal;
  std::optional<AdtSpec> adt;
  std::vector<AgentModel> agents;
  DisturbanceBox disturbance;
  Eigen::VectorXd x0;
  ControllerSpec controller;
  IntegratorConfig integrator;
  double converge_after = 40.0;
  double converge_tol = 1e-2;
  LyapunovSpec lyapunov;
  std::optional<RegulationDemoConfig> regulation;
  std::string output_dir;
  std::uint64_t seed = 1;
};

/// Throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& config);
/// Parses text, reporting JSON syntax errors with line and column.
ExperimentConfig parse_config_text(const std::string& text);

/// The controlled-Lorenz benchmark: H1, H2, u = -12(e_v^4 + 1) e_v,
/// T = 6 s periodic signal, d_i = (-0.2, 0.1, -0.2), published initial data.
nlohmann::json benchmark_config_json();
/// The internal-model regulation demo on the same topology and signal.
nlohmann::json regulation_demo_config_json();

/// Git blob SHA-1 ("blob <len>\0<content>") of the canonical dump.
std::string config_hash(const nlohmann::json& config);

struct ExperimentResult {
  Trajectory trajectory;
  std::vector<std::string> columns;
  nlohmann::json report;
  std::string csv;
  bool converged = false;
};

/// Builds the closed loop (synthesizing the controller in numeric mode).
/// Throws ValidationError on any certification failure.
ClosedLoopSystem build_closed_loop(const ExperimentConfig& config,
                                   nlohmann::json* synthesis_report = nullptr);

/// Validation pipeline (topology, average dwell time, controller, agents),
/// integration, Lyapunov monitoring. Throws ValidationError before
/// integrating when a check fails and BlowUpError on divergence.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Topology certificates and exp-ISS checks for every agent.
nlohmann::json verify_experiment(const ExperimentConfig& config, bool* all_hold = nullptr);

/// Gain synthesis report (numeric or manual mode).
nlohmann::json synthesize_experiment(const ExperimentConfig& config);

/// Runs the regulation section; report["success"] carries the outcome.
nlohmann::json run_regulation_experiment(const ExperimentConfig& config, std::string* csv);

/// Writes trajectory.csv and report.json into dir (created if needed).
void write_outputs(const std::string& dir, const std::string& csv, const nlohmann::json& report);

}  // namespace coopstab
