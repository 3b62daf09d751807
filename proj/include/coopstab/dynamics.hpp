#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coopstab/polynomial.hpp"

namespace coopstab {

/// Z-subsystem vector field F(Z, e, d).
using SubsystemField =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& z, double e, const Eigen::VectorXd& d)>;
/// Scalar coupling G(Z, e, d) entering de/dt.
using CouplingField =
    std::function<double(const Eigen::VectorXd& z, double e, const Eigen::VectorXd& d)>;

/// exp-ISS data for the Z-subsystem: V(Z) with analytic gradient, bounds
/// alpha1(|Z|) <= V <= alpha2(|Z|), and dV/dt <= -lambda V + supply(e).
struct IssCertificateData {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<double(double)> alpha1;
  std::function<double(double)> alpha2;
  double lambda = 0.0;
  Polynomial supply;  // in e
};

/// One follower in normal form: dZ/dt = F(Z, e, d), de/dt = G(Z, e, d) + b u.
///
/// A negative b is normalized at construction: the model stores |b| and
/// applies the control through input_sign() so the closed loop always sees a
/// positive input gain.
class AgentModel {
 public:
  AgentModel(std::string kind, int nz, int nd, SubsystemField f, CouplingField g, double b,
             double b_min, double b_max);

  const std::string& kind() const { return kind_; }
  int nz() const { return nz_; }
  int nd() const { return nd_; }
  double b() const { return b_abs_; }
  double input_sign() const { return input_sign_; }
  double b_min() const { return b_min_; }
  double b_max() const { return b_max_; }

  Eigen::VectorXd f(const Eigen::VectorXd& z, double e, const Eigen::VectorXd& d) const {
    return f_(z, e, d);
  }
  double g(const Eigen::VectorXd& z, double e, const Eigen::VectorXd& d) const {
    return g_(z, e, d);
  }
  /// de/dt for the normalized input u_bar.
  double e_dot(const Eigen::VectorXd& z, double e, const Eigen::VectorXd& d, double u_bar) const {
    return g_(z, e, d) + b_abs_ * u_bar;
  }

  const std::optional<IssCertificateData>& iss() const { return iss_; }
  void set_iss(IssCertificateData data) { iss_ = std::move(data); }

  /// Largest of |F(0,0,d)| and |G(0,0,d)| over the given disturbances.
  double origin_residual(const std::vector<Eigen::VectorXd>& disturbances) const;

 private:
  std::string kind_;
  int nz_;
  int nd_;
  SubsystemField f_;
  CouplingField g_;
  double b_abs_;
  double input_sign_;
  double b_min_;
  double b_max_;
  std::optional<IssCertificateData> iss_;
};

/// Controlled Lorenz follower: Z = (z1, z2), L = L_bar + d,
///   z1' = -L1 z1 + L1 e,  z2' = L2 z2 + z1 e,  e' = L3 z1 - e - z1 z2 + b u.
/// Returns (z1', z2', e'). Throws std::invalid_argument unless L1 > 0,
/// L2 < 0, L3 > 0.
Eigen::Vector3d lorenz_rhs(const Eigen::Vector2d& z, double e, double u_bar,
                           const Eigen::Vector3d& l_bar, const Eigen::Vector3d& d,
                           double b = 1.0);

/// The Lorenz agent with its exp-ISS certificate V = z1^2/2 + z1^4/4 + z2^2/2,
/// rate 4.6 and supply 5.2 e^2 + 26.5 e^4. d_bound is the per-component
/// half-width of the uncertainty box; the sign constraints on L are checked
/// at every box vertex.
AgentModel make_lorenz_agent(const Eigen::Vector3d& l_bar, double b = 1.0,
                             double d_bound = 0.2);

/// Scalar test agent: z' = -a z + c e, e' = g z + h e + b u. Carries the
/// exp-ISS certificate V = z^2/2, rate a, supply c^2 e^2 / (2 a).
AgentModel make_linear_scalar_agent(double a, double c, double g, double h, double b = 1.0);

/// Per-component box for the stacked disturbance d(t) with either a constant
/// value or a piecewise-constant schedule.
class DisturbanceBox {
 public:
  DisturbanceBox(Eigen::VectorXd lower, Eigen::VectorXd upper, Eigen::VectorXd value);
  /// values[k] is active on [times[k-1], times[k]); values.size() ==
  /// times.size() + 1.
  DisturbanceBox(Eigen::VectorXd lower, Eigen::VectorXd upper, std::vector<double> times,
                 std::vector<Eigen::VectorXd> values);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  const std::vector<double>& breakpoints() const { return times_; }
  const std::vector<Eigen::VectorXd>& schedule_values() const { return values_; }
  Eigen::VectorXd value_at(double t) const;
  bool contains_zero() const;
  /// All 2^dim corners; throws std::length_error for dim > 20.
  std::vector<Eigen::VectorXd> vertices() const;

 private:
  void validate() const;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  std::vector<double> times_;
  std::vector<Eigen::VectorXd> values_;
};

/// All 2^n corners of the box [lower, upper].
std::vector<Eigen::VectorXd> box_vertices(const Eigen::VectorXd& lower,
                                          const Eigen::VectorXd& upper);

}  // namespace coopstab
