#include "coopstab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "coopstab/closed_loop.hpp"
#include "coopstab/error.hpp"

namespace coopstab {

namespace {

void check_state(const Eigen::VectorXd& x, double t) {
  if (!x.allFinite()) throw BlowUpError("state became non-finite", t);
  if (x.norm() > kBlowUpNorm) throw BlowUpError("state norm exceeded blow-up threshold", t);
}

}  // namespace

Trajectory integrate(const PiecewiseSystem& system, const Eigen::VectorXd& x0,
                     const IntegratorConfig& config, const StepObserver& observer) {
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) throw std::invalid_argument("dt must be positive");
  if (!(config.t_end > config.t0)) throw std::invalid_argument("t_end must exceed t0");
  if (config.record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
  if (x0.size() != system.dim) throw std::invalid_argument("initial state dimension mismatch");
  if (!system.freeze) throw std::invalid_argument("piecewise system has no field");

  std::vector<double> cuts{config.t0};
  for (double b : system.breakpoints)
    if (b > config.t0 && b < config.t_end) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(config.t_end);

  auto label = [&](double t) { return system.label ? system.label(t) : 0; };
  Trajectory out;
  Eigen::VectorXd x = x0;
  check_state(x, config.t0);
  out.times.push_back(config.t0);
  out.states.push_back(x);
  out.sigma.push_back(label(config.t0));

  const auto n = static_cast<Eigen::Index>(system.dim);
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), tmp(n);
  long long step = 0;
  for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
    const double a = cuts[piece];
    const double b = cuts[piece + 1];
    const SmoothField field = system.freeze(a);
    const auto steps = std::max<long long>(1, static_cast<long long>(std::ceil((b - a) / config.dt * (1.0 - 1e-12))));
    const double h = (b - a) / static_cast<double>(steps);
    for (long long s = 0; s < steps; ++s) {
      const double t = a + static_cast<double>(s) * h;
      field(t, x, k1);
      tmp = x + 0.5 * h * k1;
      field(t + 0.5 * h, tmp, k2);
      tmp = x + 0.5 * h * k2;
      field(t + 0.5 * h, tmp, k3);
      tmp = x + h * k3;
      field(t + h, tmp, k4);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double t_next = s + 1 == steps ? b : a + static_cast<double>(s + 1) * h;
      check_state(x, t_next);
      if (observer) observer(t, h);
      ++step;
      if (s + 1 == steps || step % config.record_stride == 0) {
        out.times.push_back(t_next);
        out.states.push_back(x);
        out.sigma.push_back(label(t_next));
      }
    }
  }
  return out;
}

Trajectory integrate(const ClosedLoopSystem& system, const Eigen::VectorXd& x0,
                     const IntegratorConfig& config, const StepObserver& observer) {
  if (config.t0 < system.signal().t0()) throw std::invalid_argument("integration starts before the signal");
  PiecewiseSystem ps;
  ps.dim = system.state_dim();
  ps.breakpoints = system.signal().switch_times();
  const auto& db = system.disturbance().breakpoints();
  ps.breakpoints.insert(ps.breakpoints.end(), db.begin(), db.end());
  ps.freeze = [&system](double t) -> SmoothField {
    const int p = system.signal().value_at(t);
    const Eigen::VectorXd d = system.disturbance().value_at(t);
    return [&system, p, d](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
      system.rhs_frozen(p, d, x, dx);
    };
  };
  ps.label = [&system](double t) { return system.signal().value_at(t); };
  return integrate(ps, x0, config, observer);
}

std::string trajectory_csv(const Trajectory& trajectory, const std::vector<std::string>& columns) {
  std::string out = "t,sigma";
  for (const auto& c : columns) out += "," + c;
  out += "\n";
  char buf[40];
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const auto& x = trajectory.states[k];
    if (static_cast<std::size_t>(x.size()) != columns.size())
      throw std::invalid_argument("column count does not match state dimension");
    std::snprintf(buf, sizeof buf, "%.17g", trajectory.times[k]);
    out += buf;
    out += "," + std::to_string(trajectory.sigma[k]);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", x(j));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

std::vector<std::string> closed_loop_columns(const ClosedLoopSystem& system) {
  std::vector<std::string> cols;
  for (int i = 0; i < system.followers(); ++i)
    for (int k = 0; k < system.agents()[i].nz(); ++k)
      cols.push_back("Z" + std::to_string(i + 1) + "_" + std::to_string(k + 1));
  for (int i = 0; i < system.followers(); ++i) cols.push_back("e" + std::to_string(i + 1));
  return cols;
}

}  // namespace coopstab
