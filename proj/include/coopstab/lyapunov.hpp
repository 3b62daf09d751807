#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coopstab/polynomial.hpp"
#include "coopstab/simulate.hpp"

namespace coopstab {

class SwitchingSignal;

using ScalarField = std::function<double(const Eigen::VectorXd&)>;
using GradientField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using ClassKFunction = std::function<double(double)>;

/// Central-difference gradient with step h.
Eigen::VectorXd numeric_gradient(const ScalarField& v, const Eigen::VectorXd& x,
                                 double h = 1e-6);

/// Largest relative disagreement between the analytic gradient and central
/// differences at steps h and h/2 over the given points.
double gradient_mismatch(const ScalarField& v, const GradientField& grad,
                         const std::vector<Eigen::VectorXd>& points, double h = 1e-6);

/// V with alpha1(|x|) <= V <= alpha2(|x|) and dV/dt <= -lambda V + beta(u).
struct SupplyPair {
  ScalarField value;
  GradientField gradient;  // may be empty: central differences are used
  ClassKFunction alpha1;
  ClassKFunction alpha2;
  double lambda = 1.0;
  Polynomial beta;  // in the scalar input u
};

/// rho_bar is smooth, non-decreasing and positive on (0, inf) when given as
/// a nonzero polynomial with nonnegative coefficients.
bool is_sn(const Polynomial& rho_bar);

/// V_bar = int_0^V rho_bar(s) ds, which satisfies
/// dV_bar/dt <= -(lambda/2) V_bar + beta_bar(u) with
/// beta_bar(u) = rho_bar((2/lambda) beta(u)) beta(u).
class ScaledLyapunov {
 public:
  ScaledLyapunov(SupplyPair base, Polynomial rho_bar);

  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  /// V_bar as a function of the base value V.
  double of_base(double v) const { return antiderivative_(v); }
  double decay_rate() const { return base_.lambda / 2.0; }

  const Polynomial& rho_bar() const { return rho_bar_; }
  const Polynomial& antiderivative() const { return antiderivative_; }
  const Polynomial& beta_bar() const { return beta_bar_; }
  const SupplyPair& base() const { return base_; }
  double alpha_bar1(double s) const { return antiderivative_(base_.alpha1(s)); }
  double alpha_bar2(double s) const { return antiderivative_(base_.alpha2(s)); }

 private:
  SupplyPair base_;
  Polynomial rho_bar_;
  Polynomial antiderivative_;
  Polynomial beta_bar_;
};

/// Throws std::invalid_argument when rho_bar is not SN.
ScaledLyapunov transform_supply(const SupplyPair& pair, const Polynomial& rho_bar);

struct ChooseRhoOptions {
  int degree = 3;
  int samples = 400;
  /// Small-s hypothesis check: the ratio target/alpha1 may grow by at most
  /// this factor between s = 1e-2 * hi and s = 1e-6 * hi.
  double small_s_growth_limit = 10.0;
};

/// Polynomial SN rho_bar with rho_bar(alpha1(s)) alpha1(s) >= target(s) on
/// the sampled fit interval [lo, hi]. Throws std::domain_error when target
/// is not O(alpha1) near zero (numerically).
Polynomial choose_rho(const ClassKFunction& alpha1, const ClassKFunction& target, double lo,
                      double hi, const ChooseRhoOptions& options = {});

/// Grid (x uniform lattice, u uniform) times listed disturbances, plus
/// seeded uniform random points.
struct SamplePlan {
  Eigen::VectorXd state_lower;
  Eigen::VectorXd state_upper;
  double state_step = 0.1;
  double input_lower = 0.0;
  double input_upper = 0.0;
  double input_step = 0.1;
  std::vector<Eigen::VectorXd> disturbances;
  int random_points = 0;
  std::uint64_t seed = 0;

  std::string describe() const;
};

struct VerificationReport {
  std::string check;
  std::string plan;
  bool holds = false;
  double worst_margin = 0.0;
  Eigen::VectorXd witness_state;
  double witness_input = 0.0;
  Eigen::VectorXd witness_disturbance;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  /// Always "holds on samples only": global claims are not certified.
  std::string scope = "holds on samples only";
};

using InputSystem = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, double u,
                                                  const Eigen::VectorXd& d)>;

/// margin = -lambda V - grad V . f + supply(u) over the plan. holds iff
/// margin >= -rel_tol * (|lambda V| + |grad V . f| + |supply|) everywhere.
VerificationReport verify_supply_inequality(const InputSystem& f, const ScalarField& value,
                                            const GradientField& gradient, double lambda,
                                            const std::function<double(double)>& supply,
                                            const SamplePlan& plan, double rel_tol = 1e-9,
                                            const std::string& check = "supply_inequality");

/// Strong exp-ISS form: dV/dt <= -(lambda V + c alpha(x)) + supply(u).
VerificationReport verify_strong_supply_inequality(
    const InputSystem& f, const ScalarField& value, const GradientField& gradient, double lambda,
    double c, const ScalarField& alpha, const std::function<double(double)>& supply,
    const SamplePlan& plan, double rel_tol = 1e-9,
    const std::string& check = "strong_supply_inequality");

/// U_p, p = 1..n0 (stored 0-based), with a common decay rate.
struct MultiLyapunovFamily {
  std::vector<ScalarField> members;
  double lambda0 = 0.0;
};

struct Mu0Estimate {
  double value = 1.0;
  Eigen::VectorXd witness;
  int p = 1;
  int q = 1;
  std::size_t samples = 0;
};

/// max over samples and (p, q) of U_p(x) / U_q(x). Samples at the origin
/// are skipped; a zero U_p at x != 0 throws ValidationError.
Mu0Estimate estimate_mu0(const MultiLyapunovFamily& family,
                         const std::vector<Eigen::VectorXd>& samples);

struct DwellIntervalDecay {
  double t_start = 0.0;
  double t_end = 0.0;
  int p = 1;
  double u_start = 0.0;
  double u_end = 0.0;
  /// max over consecutive samples of (ln U_{k+1} - ln U_k) / (t_{k+1} - t_k).
  double max_log_rate = 0.0;
};

struct SwitchJump {
  double t = 0.0;
  int p_before = 1;
  int p_after = 1;
  double ratio = 1.0;  // U_{p+}(x(t)) / U_{p-}(x(t))
};

struct DecayReport {
  std::vector<double> u;  // U_{sigma(t)}(x(t)) per sample
  std::vector<DwellIntervalDecay> intervals;
  std::vector<SwitchJump> jumps;
  std::vector<double> u_at_switches;
  double max_jump_ratio = 1.0;
  bool decaying = false;
  bool flagged = false;
  std::string summary;
};

struct MonitorOptions {
  /// U at the last switch (or the final sample) must fall below this
  /// fraction of U(t0), or below `absolute_floor`.
  double decay_fraction = 1e-3;
  double absolute_floor = 1e-12;
};

/// Throws std::invalid_argument when the trajectory does not start at the
/// signal's t0.
DecayReport monitor_trajectory(const Trajectory& trajectory, const MultiLyapunovFamily& family,
                               const SwitchingSignal& signal, const MonitorOptions& options = {});

/// Pointwise two-case inequality behind the supply-pair change:
/// rho(V)(-lambda V + beta) <= -(lambda/2) rho(V) V + rho((2/lambda) beta) beta.
/// Returns right - left (nonnegative when it holds).
double two_case_margin(const Polynomial& rho_bar, double v, double beta, double lambda);

}  // namespace coopstab
