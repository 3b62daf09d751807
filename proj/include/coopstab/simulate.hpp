#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace coopstab {

class ClosedLoopSystem;

inline constexpr double kBlowUpNorm = 1e9;

struct IntegratorConfig {
  double t0 = 0.0;
  double t_end = 10.0;
  double dt = 1e-3;
  /// Record every n-th step; piece boundaries (switch instants) are always
  /// recorded.
  int record_stride = 1;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<int> sigma;

  std::size_t size() const { return times.size(); }
  const Eigen::VectorXd& final_state() const { return states.back(); }
};

/// A smooth field, valid on one piece between consecutive breakpoints.
using SmoothField = std::function<void(double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx)>;

/// ODE whose right-hand side is smooth between known breakpoints.
struct PiecewiseSystem {
  int dim = 0;
  std::vector<double> breakpoints;
  /// Returns the field active on the piece starting at t (sampled
  /// right-continuously).
  std::function<SmoothField(double t)> freeze;
  /// Label recorded with each sample (the active topology index).
  std::function<int(double t)> label;
};

/// Called with every step interval [t, t + h].
using StepObserver = std::function<void(double t, double h)>;

/// Classic RK4 with fixed step. The grid is split at every breakpoint inside
/// (t0, t_end): each piece [a, b] takes ceil((b - a) / dt) equal steps, so no
/// step straddles a breakpoint. Throws BlowUpError on a non-finite state or
/// |x| > kBlowUpNorm, std::invalid_argument on a bad config.
Trajectory integrate(const PiecewiseSystem& system, const Eigen::VectorXd& x0,
                     const IntegratorConfig& config, const StepObserver& observer = {});

/// Integrates the switched closed loop, freezing sigma and d at the start of
/// every piece.
Trajectory integrate(const ClosedLoopSystem& system, const Eigen::VectorXd& x0,
                     const IntegratorConfig& config, const StepObserver& observer = {});

/// CSV with header "t,sigma,<columns...>", 17 significant digits, LF endings.
std::string trajectory_csv(const Trajectory& trajectory, const std::vector<std::string>& columns);

/// Column names Z{i}_{k}, then e{i}, matching the closed-loop state layout.
std::vector<std::string> closed_loop_columns(const ClosedLoopSystem& system);

}  // namespace coopstab
