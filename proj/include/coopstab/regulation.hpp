#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "coopstab/controller.hpp"
#include "coopstab/graph_topology.hpp"
#include "coopstab/simulate.hpp"
#include "coopstab/switching.hpp"

namespace coopstab {

struct SpectrumReport {
  bool valid = false;
  std::vector<std::complex<double>> eigenvalues;
  std::vector<std::string> issues;
};

/// Neutral stability: every eigenvalue of S has |Re| <= tol and is
/// semi-simple (rank(S - lambda I) == n - algebraic multiplicity).
SpectrumReport validate_exosystem(const Eigen::MatrixXd& s, double tol = 1e-9);

/// [[0, omega], [-omega, 0]].
Eigen::MatrixXd harmonic_exosystem(double omega);

/// Coefficients a_0..a_{n-1} of det(sI - A) = s^n + a_{n-1} s^{n-1} + ... + a_0.
Eigen::VectorXd characteristic_polynomial(const Eigen::MatrixXd& a);

/// Companion matrix of s^n + a_{n-1} s^{n-1} + ... + a_0 (last row -a).
Eigen::MatrixXd companion_matrix(const Eigen::VectorXd& a);

/// Solves T Phi - M T = N Gamma. Throws std::invalid_argument when the
/// spectra of M and Phi intersect (within 1e-9).
Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& m,
                                const Eigen::MatrixXd& rhs);

/// eta' = M eta + N u with Psi T = Gamma, where T maps the steady-state
/// generator state tau (tau' = Phi tau, u_ss = Gamma tau) to
/// theta = T tau.
struct InternalModel {
  Eigen::MatrixXd m;
  Eigen::VectorXd n;
  Eigen::RowVectorXd psi;
  Eigen::MatrixXd phi;
  Eigen::RowVectorXd gamma;
  Eigen::MatrixXd t;
  double sylvester_residual = 0.0;  // |T Phi - M T - N Gamma|_F
  double psi_residual = 0.0;  // |Psi T - Gamma|
  double condition_number = 0.0;  // of T

  int dim() const { return static_cast<int>(m.rows()); }
};

/// Throws std::invalid_argument when M is not Hurwitz, (M, N) is not
/// controllable, or the spectra overlap; ValidationError when T is
/// singular (message carries the condition number).
InternalModel build_internal_model(const Eigen::MatrixXd& phi, const Eigen::RowVectorXd& gamma,
                                   const Eigen::MatrixXd& m, const Eigen::VectorXd& n);

/// Companion pair with characteristic polynomial (s+1)(s+2)...(s+dim) and
/// N = (0, ..., 0, 1).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> default_internal_model_pair(int dim);

/// u_i = -k omega_i(e_vi^2) e_vi + Psi_i eta_i, eta_i' = M_i eta_i + N_i u_i.
class RegulationController {
 public:
  RegulationController(std::vector<InternalModel> models, SwitchedController stabilizer);

  int agents() const { return static_cast<int>(models_.size()); }
  int eta_dim() const { return eta_total_; }
  int eta_offset(int i) const { return offsets_[i]; }
  const std::vector<InternalModel>& models() const { return models_; }
  const SwitchedController& stabilizer() const { return stabilizer_; }

  /// Returns (u, eta') for the virtual outputs and stacked eta.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> evaluate(const Eigen::VectorXd& ev,
                                                       const Eigen::VectorXd& eta) const;

 private:
  std::vector<InternalModel> models_;
  SwitchedController stabilizer_;
  std::vector<int> offsets_;
  int eta_total_ = 0;
};

RegulationController regulation_controller(std::vector<InternalModel> models,
                                           const SwitchedController& stabilizer);

/// One agent of the augmented (error-coordinate) system:
///   zbar' = f_bar(zbar, e, d)
///   eta~' = M eta~ + M N b^{-1} e - N b^{-1} g_bar(zbar, e, d)
///   e'    = g_bar(zbar, e, d) + b Psi eta~ + Psi N e + b u_bar
struct AugmentedAgent {
  int nz = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, double, const Eigen::VectorXd&)> f_bar;
  std::function<double(const Eigen::VectorXd&, double, const Eigen::VectorXd&)> g_bar;
  double b = 1.0;
  InternalModel model;

  int dim() const { return nz + model.dim() + 1; }
};

/// Per-agent state blocks (zbar_i, eta~_i, e_i). u_bar = -k omega(e_v^2) e_v
/// with e_v = H e.
Eigen::VectorXd augmented_rhs(const std::vector<AugmentedAgent>& agents,
                              const Eigen::MatrixXd& h, const SwitchedController& stabilizer,
                              const Eigen::VectorXd& d, const Eigen::VectorXd& x);

/// Demo plant y_i' = b_i u_i + w_i y_i tracking y0 = q v with v' = S v.
struct RegulationDemoConfig {
  Eigen::MatrixXd s = harmonic_exosystem(1.0);
  Eigen::RowVectorXd q;  // empty: first component of v
  std::vector<double> w{0.5, 0.5, 0.5};
  std::vector<double> b{1.0, 1.0, 1.0};
  Eigen::VectorXd v0 = Eigen::Vector2d(1.0, 0.0);
  Eigen::VectorXd y0 = Eigen::Vector3d::Zero();
  Eigen::VectorXd eta0;  // stacked; empty means zero
  std::optional<Eigen::MatrixXd> m;
  std::optional<Eigen::VectorXd> n;
  TopologySet topology;
  SwitchingSignal signal = SwitchingSignal::constant(1);
  SwitchedController stabilizer = SwitchedController::uniform(5.0, Polynomial{1.0, 0.1}, 3);
  IntegratorConfig integrator{0.0, 60.0, 1e-3, 10};
  double settle_time = 50.0;
  double tolerance = 1e-3;
};

/// Topology {H1, H2} of the Lorenz benchmark, periodic signal T = 6.
RegulationDemoConfig default_regulation_demo();

struct RegulationResult {
  Trajectory trajectory;  // state (y, eta, v)
  std::vector<std::string> columns;
  std::vector<InternalModel> models;
  std::vector<double> errors_at_end;
  double max_error_after_settle = 0.0;
  double max_sylvester_residual = 0.0;
  double max_psi_residual = 0.0;
  bool success = false;
};

/// Steady-state generator of u_i = b_i^{-1}(q S - w_i q) v in companion
/// form: tau = (u, u', ..., u^{(n-1)}), Phi = companion(char poly of S),
/// Gamma = (1, 0, ..., 0). Returns (Phi, Gamma, E) with tau = E v.
struct SteadyStateGenerator {
  Eigen::MatrixXd phi;
  Eigen::RowVectorXd gamma;
  Eigen::MatrixXd tau_of_v;
};
SteadyStateGenerator demo_steady_state_generator(const Eigen::MatrixXd& s,
                                                 const Eigen::RowVectorXd& q, double w, double b);

std::vector<InternalModel> build_demo_internal_models(const RegulationDemoConfig& config);

/// Validates the exosystem and internal models, then simulates plant,
/// exosystem and controller in original coordinates.
RegulationResult run_regulation_demo(const RegulationDemoConfig& config);

/// Closed loop in augmented coordinates from the initial state that
/// corresponds to config's (y0, eta0, v0). State blocks (eta~_i, e_i).
Trajectory simulate_augmented(const RegulationDemoConfig& config,
                              const std::vector<InternalModel>& models);

/// e_i(t) = y_i - q v for each sample of an original-coordinate trajectory.
std::vector<Eigen::VectorXd> demo_tracking_errors(const RegulationDemoConfig& config,
                                                  const Trajectory& original);

}  // namespace coopstab
