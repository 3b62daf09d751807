#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coopstab/mmatrix.hpp"
#include "coopstab/polynomial.hpp"

namespace coopstab {

/// e_v = H_p e. Throws std::invalid_argument on a size mismatch.
Eigen::VectorXd virtual_output(const Eigen::MatrixXd& h, const Eigen::VectorXd& e);

/// u_bar_i = -k * omega_i(e_vi^2) * e_vi.
///
/// Each omega_i is a polynomial in s = e_v^2 with nonnegative coefficients
/// and constant term >= 1, which makes it smooth, non-decreasing and >= 1 on
/// [0, inf).
class SwitchedController {
 public:
  /// Throws std::invalid_argument if k <= 0 or any omega_i violates the
  /// representation constraints.
  SwitchedController(double k, std::vector<Polynomial> omega);
  /// The same omega for every one of `agents` followers.
  static SwitchedController uniform(double k, const Polynomial& omega, int agents);

  double k() const { return k_; }
  int agents() const { return static_cast<int>(omega_.size()); }
  const std::vector<Polynomial>& omega() const { return omega_; }

  double control(int i, double ev) const { return -k_ * omega_[i](ev * ev) * ev; }
  Eigen::VectorXd evaluate(const Eigen::VectorXd& ev) const;

 private:
  double k_;
  std::vector<Polynomial> omega_;
};

/// Why `omega` is not an admissible controller weight, or empty.
std::optional<std::string> omega_violation(const Polynomial& omega);

/// Axis-aligned sampling box.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// |G(Z, e, d)|^2 <= gamma(Z) + chi(e) with gamma(Z) = gamma_sq(|Z|^2) and
/// chi(e) = chi_sq(e^2); both polynomials have nonnegative coefficients and
/// no constant term.
struct BoundSplit {
  Polynomial gamma_sq;
  Polynomial chi_sq;
  double scale = 1.0;  // inflation that made the fit dominate the fit grid
  double min_validation_slack = 0.0;
  std::size_t fit_samples = 0;
  std::size_t validation_samples = 0;
  std::uint64_t seed = 0;

  double gamma(const Eigen::VectorXd& z) const { return gamma_sq(z.squaredNorm()); }
  double chi(double e) const { return chi_sq(e * e); }
};

struct BoundSplitOptions {
  double margin = 0.1;
  int degree = 2;  // highest power of |Z|^2 and e^2
  int grid_points = 13;  // per axis on the fit grid
  int validation_samples = 10000;
  std::uint64_t seed = 7;
};

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

using CouplingSampler =
    std::function<double(const Eigen::VectorXd& z, double e, const Eigen::VectorXd& d)>;

/// Nonnegative least-squares fit of |G|^2 on a grid over the boxes (d at the
/// given vertices), scaled up until it dominates every fit sample, inflated
/// by (1 + margin), and checked on seeded random validation samples.
/// Throws FitError if a validation sample is not dominated.
BoundSplit bound_split(const CouplingSampler& g, const Box& z_box, double e_lo, double e_hi,
                       const std::vector<Eigen::VectorXd>& d_vertices,
                       const BoundSplitOptions& options = {});

/// Per-agent ingredients of the cross term: chi_i from bound_split and the
/// rescaled supply pi_bar_i, both as polynomials in e^2.
struct AgentBounds {
  Polynomial chi_sq;
  Polynomial pi_bar_sq;
};

struct AgentEnvelope {
  Polynomial rho_tilde_sq;  // rho_tilde_i(y) = rho_tilde_sq(y^2) >= 1
  Polynomial omega;  // omega_i(s), s = e_v^2
  double min_slack = 0.0;  // min over samples of omega(s^2) - Delta((1+s^2)/2)
  double min_delta = 0.0;  // min over samples of Delta((1+s^2)/2)
};

struct GainSynthesisReport {
  std::string mode;  // "manual" or "numeric"
  std::string certification;
  std::optional<double> epsilon2;
  std::optional<double> k_min;
  double k_chosen = 0.0;
  std::optional<double> lambda0;
  std::optional<double> c0;
  CouplingConstants constants;
  std::vector<AgentEnvelope> agents;
  std::optional<double> k_slack;  // k lambda1 - eps2 dM^2 bM^2 - lambda0 dM bM - 1
  std::size_t validation_samples = 0;
  bool invariants_hold = false;

  SwitchedController controller() const;
};

/// (eps2 dM^2 bM^2 + lambda0 dM bM + 1) / lambda1_tilde. Throws
/// std::domain_error("degenerate coupling") when lambda1_tilde <= 0.
double gain_lower_bound(const CouplingConstants& cc, double epsilon2, double lambda0);
double gain_slack(const CouplingConstants& cc, double k, double epsilon2, double lambda0);

struct GainSynthesisOptions {
  double k_request = 0.0;  // use max(k_request, k_min)
  double validation_range = 10.0;  // |e_v| <= range
  int validation_samples = 2001;
};

/// Numeric gain synthesis: eps2 = h_norm_sq_max / c0, k per the coupling
/// inequality, and omega_i dominating Delta_i((1+s)/2) where rho_tilde_i
/// bounds the aggregated cross term in e_v coordinates for every H_p.
GainSynthesisReport synthesize_gain(const CouplingConstants& cc, double lambda0, double c0,
                                    const std::vector<Eigen::MatrixXd>& h_matrices,
                                    const std::vector<AgentBounds>& bounds,
                                    const GainSynthesisOptions& options = {});

/// Manual mode: validates user (k, omega); records k_min and slack only when
/// epsilon2 and lambda0 are supplied.
GainSynthesisReport manual_gain_report(const SwitchedController& controller,
                                       const CouplingConstants& cc,
                                       std::optional<double> lambda0 = std::nullopt,
                                       std::optional<double> epsilon2 = std::nullopt);

}  // namespace coopstab
