#include "coopstab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "coopstab/error.hpp"
#include "coopstab/switching.hpp"
#include "nnls.hpp"

namespace coopstab {

Eigen::VectorXd numeric_gradient(const ScalarField& v, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + step;
    const double fp = v(xp);
    xp(i) = x(i) - step;
    const double fm = v(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * step);
  }
  return g;
}

double gradient_mismatch(const ScalarField& v, const GradientField& grad,
                         const std::vector<Eigen::VectorXd>& points, double h) {
  double worst = 0.0;
  for (const auto& x : points) {
    const Eigen::VectorXd a = grad(x);
    // Richardson combination of steps h and h/2 removes the h^2 term.
    const Eigen::VectorXd g1 = numeric_gradient(v, x, h);
    const Eigen::VectorXd g2 = numeric_gradient(v, x, h / 2.0);
    const Eigen::VectorXd n = (4.0 * g2 - g1) / 3.0;
    const double scale = std::max(1.0, a.norm());
    worst = std::max(worst, (a - n).norm() / scale);
  }
  return worst;
}

bool is_sn(const Polynomial& rho_bar) {
  if (rho_bar.is_zero() || !rho_bar.has_nonnegative_coefficients()) return false;
  for (double c : rho_bar.coefficients())
    if (!std::isfinite(c)) return false;
  return true;
}

ScaledLyapunov::ScaledLyapunov(SupplyPair base, Polynomial rho_bar)
    : base_(std::move(base)), rho_bar_(std::move(rho_bar)) {
  if (!is_sn(rho_bar_)) throw std::invalid_argument("rho_bar is not SN: " + rho_bar_.to_string("s"));
  if (!(base_.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  antiderivative_ = rho_bar_.antiderivative();
  const Polynomial scaled_beta = (2.0 / base_.lambda) * base_.beta;
  beta_bar_ = rho_bar_.compose(scaled_beta) * base_.beta;
}

double ScaledLyapunov::value(const Eigen::VectorXd& x) const { return antiderivative_(base_.value(x)); }

Eigen::VectorXd ScaledLyapunov::gradient(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd g = base_.gradient ? base_.gradient(x) : numeric_gradient(base_.value, x);
  return rho_bar_(base_.value(x)) * g;
}

ScaledLyapunov transform_supply(const SupplyPair& pair, const Polynomial& rho_bar) {
  return ScaledLyapunov(pair, rho_bar);
}

Polynomial choose_rho(const ClassKFunction& alpha1, const ClassKFunction& target, double lo,
                      double hi, const ChooseRhoOptions& options) {
  if (!(hi > lo) || lo < 0.0) throw std::invalid_argument("choose_rho needs 0 <= lo < hi");
  if (options.degree < 0 || options.samples < 2) throw std::invalid_argument("bad choose_rho options");

  auto ratio = [&](double s) {
    const double a = alpha1(s);
    if (!(a > 0.0)) throw std::domain_error("alpha1 vanishes at s > 0");
    return target(s) / a;
  };
  const double r_far = ratio(1e-2 * hi);
  const double r_near = ratio(1e-6 * hi);
  if (r_near > options.small_s_growth_limit * std::max(r_far, 0.0) &&
      r_near > std::numeric_limits<double>::min()) {
    std::ostringstream os;
    os << "target is not O(alpha1) near zero: ratio grows from " << r_far << " to " << r_near;
    throw std::domain_error(os.str());
  }

  std::vector<double> ss;
  for (int k = 0; k < options.samples; ++k) ss.push_back(lo + (hi - lo) * k / (options.samples - 1));
  for (int j = 1; j <= 6; ++j) ss.push_back(hi * std::pow(10.0, -j));
  std::vector<double> as;
  std::vector<double> ts;
  double near_ratio = 0.0;
  for (double s : ss) {
    if (s <= 0.0) continue;
    const double a = alpha1(s);
    if (!(a > 0.0)) continue;
    as.push_back(a);
    ts.push_back(target(s));
    if (s < 1e-2 * hi * (1.0 + 1e-12)) near_ratio = std::max(near_ratio, ts.back() / a);
  }
  const int deg = options.degree;
  Eigen::MatrixXd basis(static_cast<Eigen::Index>(as.size()), deg + 1);
  Eigen::VectorXd y(static_cast<Eigen::Index>(as.size()));
  for (std::size_t k = 0; k < as.size(); ++k) {
    double p = as[k];
    for (int m = 0; m <= deg; ++m) {
      basis(static_cast<Eigen::Index>(k), m) = p;
      p *= as[k];
    }
    y(static_cast<Eigen::Index>(k)) = ts[k];
  }
  Eigen::VectorXd c = detail::nnls(basis, y);
  c(0) = std::max(c(0), near_ratio);
  if (c.maxCoeff() <= 0.0) c(0) = 1.0;
  double scale = 1.0;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const double fit = basis.row(k).dot(c);
    if (y(k) > 0.0) {
      if (fit <= 0.0) throw std::domain_error("rho fit vanishes where the target is positive");
      scale = std::max(scale, y(k) / fit);
    }
  }
  Polynomial rho(std::vector<double>(c.data(), c.data() + c.size()));
  rho *= scale;
  // Push past rounding so the inequality holds on every sample as evaluated.
  for (int guard = 0; guard < 8; ++guard) {
    bool ok = true;
    for (std::size_t k = 0; k < as.size(); ++k)
      if (rho(as[k]) * as[k] < ts[k]) ok = false;
    if (ok) break;
    rho *= 1.0 + 1e-12;
  }
  return rho;
}

std::string SamplePlan::describe() const {
  std::ostringstream os;
  os << "state grid [";
  for (Eigen::Index i = 0; i < state_lower.size(); ++i)
    os << (i ? ", " : "") << state_lower(i) << ".." << state_upper(i);
  os << "] step " << state_step << "; input " << input_lower << ".." << input_upper << " step "
     << input_step << "; " << disturbances.size() << " disturbance vertices; " << random_points
     << " random points (seed " << seed << ")";
  return os.str();
}

namespace {

std::vector<double> lattice(double lo, double hi, double step) {
  std::vector<double> out;
  if (hi < lo) return out;
  if (!(step > 0.0) || hi == lo) return {lo};
  const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  for (long long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
  if (hi - out.back() > 1e-9 * step) out.push_back(hi);
  return out;
}

template <typename Margin>
VerificationReport sweep(const SamplePlan& plan, const std::string& check, Margin&& margin) {
  VerificationReport r;
  r.check = check;
  r.plan = plan.describe();
  r.seed = plan.seed;
  r.holds = true;
  r.worst_margin = std::numeric_limits<double>::infinity();
  std::vector<Eigen::VectorXd> ds = plan.disturbances;
  if (ds.empty()) ds.emplace_back(0);

  auto visit = [&](const Eigen::VectorXd& x, double u, const Eigen::VectorXd& d) {
    const auto [m, tol] = margin(x, u, d);
    ++r.samples;
    if (m < r.worst_margin) {
      r.worst_margin = m;
      r.witness_state = x;
      r.witness_input = u;
      r.witness_disturbance = d;
    }
    if (m < -tol) r.holds = false;
  };

  const Eigen::Index n = plan.state_lower.size();
  std::vector<std::vector<double>> axes;
  for (Eigen::Index i = 0; i < n; ++i)
    axes.push_back(lattice(plan.state_lower(i), plan.state_upper(i), plan.state_step));
  const auto inputs = lattice(plan.input_lower, plan.input_upper, plan.input_step);
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd x(n);
  bool done = false;
  for (const auto& ax : axes)
    if (ax.empty()) done = true;
  while (!done) {
    for (Eigen::Index i = 0; i < n; ++i) x(i) = axes[i][idx[i]];
    for (double u : inputs)
      for (const auto& d : ds) visit(x, u, d);
    Eigen::Index a = 0;
    while (a < n && ++idx[a] == axes[a].size()) idx[a++] = 0;
    if (a == n) done = true;
  }

  std::mt19937_64 rng(plan.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, ds.size() - 1);
  for (int k = 0; k < plan.random_points; ++k) {
    for (Eigen::Index i = 0; i < n; ++i)
      x(i) = plan.state_lower(i) + unit(rng) * (plan.state_upper(i) - plan.state_lower(i));
    const double u = plan.input_lower + unit(rng) * (plan.input_upper - plan.input_lower);
    visit(x, u, ds[pick(rng)]);
  }
  if (r.samples == 0) r.worst_margin = 0.0;
  return r;
}

}  // namespace

VerificationReport verify_supply_inequality(const InputSystem& f, const ScalarField& value,
                                            const GradientField& gradient, double lambda,
                                            const std::function<double(double)>& supply,
                                            const SamplePlan& plan, double rel_tol,
                                            const std::string& check) {
  return sweep(plan, check, [&](const Eigen::VectorXd& x, double u, const Eigen::VectorXd& d) {
    const Eigen::VectorXd g = gradient ? gradient(x) : numeric_gradient(value, x);
    const double decay = lambda * value(x);
    const double flow = g.dot(f(x, u, d));
    const double s = supply(u);
    return std::pair{-decay - flow + s, rel_tol * (std::abs(decay) + std::abs(flow) + std::abs(s))};
  });
}

VerificationReport verify_strong_supply_inequality(
    const InputSystem& f, const ScalarField& value, const GradientField& gradient, double lambda,
    double c, const ScalarField& alpha, const std::function<double(double)>& supply,
    const SamplePlan& plan, double rel_tol, const std::string& check) {
  return sweep(plan, check, [&](const Eigen::VectorXd& x, double u, const Eigen::VectorXd& d) {
    const Eigen::VectorXd g = gradient ? gradient(x) : numeric_gradient(value, x);
    const double decay = lambda * value(x) + c * alpha(x);
    const double flow = g.dot(f(x, u, d));
    const double s = supply(u);
    return std::pair{-decay - flow + s, rel_tol * (std::abs(decay) + std::abs(flow) + std::abs(s))};
  });
}

Mu0Estimate estimate_mu0(const MultiLyapunovFamily& family,
                         const std::vector<Eigen::VectorXd>& samples) {
  if (family.members.empty()) throw std::invalid_argument("empty Lyapunov family");
  if (samples.empty()) throw std::invalid_argument("estimate_mu0 needs at least one sample");
  Mu0Estimate est;
  std::vector<double> u(family.members.size());
  for (const auto& x : samples) {
    if (x.norm() == 0.0) continue;
    ++est.samples;
    for (std::size_t p = 0; p < u.size(); ++p) {
      u[p] = family.members[p](x);
      if (!(u[p] > 0.0)) {
        std::ostringstream os;
        os << "U_" << p + 1 << " is not positive at a nonzero state (|x| = " << x.norm() << ")";
        throw ValidationError(os.str());
      }
    }
    for (std::size_t p = 0; p < u.size(); ++p) {
      for (std::size_t q = 0; q < u.size(); ++q) {
        const double ratio = u[p] / u[q];
        if (ratio > est.value) {
          est.value = ratio;
          est.witness = x;
          est.p = static_cast<int>(p + 1);
          est.q = static_cast<int>(q + 1);
        }
      }
    }
  }
  return est;
}

DecayReport monitor_trajectory(const Trajectory& trajectory, const MultiLyapunovFamily& family,
                               const SwitchingSignal& signal, const MonitorOptions& options) {
  if (trajectory.size() == 0) throw std::invalid_argument("empty trajectory");
  if (std::abs(trajectory.times.front() - signal.t0()) > 1e-12 * std::max(1.0, std::abs(signal.t0())))
    throw std::invalid_argument("trajectory does not start at the signal's t0");
  if (signal.max_value() > static_cast<int>(family.members.size()))
    throw std::invalid_argument("signal refers to a missing Lyapunov family member");

  DecayReport r;
  const auto u_of = [&](int p, const Eigen::VectorXd& x) { return family.members[p - 1](x); };
  const auto& times = trajectory.times;
  for (std::size_t k = 0; k < trajectory.size(); ++k)
    r.u.push_back(u_of(signal.value_at(times[k]), trajectory.states[k]));

  std::size_t k = 0;
  while (k < trajectory.size()) {
    const std::size_t piece = signal.piece_index(times[k]);
    const int p = signal.value_at(times[k]);
    std::size_t end = k;
    while (end + 1 < trajectory.size() && signal.piece_index(times[end + 1]) == piece) ++end;
    DwellIntervalDecay iv;
    iv.t_start = times[k];
    iv.p = p;
    iv.u_start = r.u[k];
    iv.max_log_rate = -std::numeric_limits<double>::infinity();
    // Extend to the next switch sample, evaluated with this piece's U.
    std::size_t last = end;
    double u_last = r.u[end];
    if (end + 1 < trajectory.size()) {
      last = end + 1;
      u_last = u_of(p, trajectory.states[last]);
    }
    double prev = r.u[k];
    for (std::size_t j = k + 1; j <= last; ++j) {
      const double cur = j == last ? u_last : r.u[j];
      if (prev > 0.0 && cur > 0.0)
        iv.max_log_rate = std::max(iv.max_log_rate, (std::log(cur) - std::log(prev)) / (times[j] - times[j - 1]));
      prev = cur;
    }
    if (!std::isfinite(iv.max_log_rate)) iv.max_log_rate = 0.0;
    iv.t_end = times[last];
    iv.u_end = u_last;
    r.intervals.push_back(iv);
    if (last != end) {
      SwitchJump jump;
      jump.t = times[last];
      jump.p_before = p;
      jump.p_after = signal.value_at(times[last]);
      jump.ratio = u_last > 0.0 ? r.u[last] / u_last : 1.0;
      r.max_jump_ratio = std::max(r.max_jump_ratio, jump.ratio);
      r.jumps.push_back(jump);
      r.u_at_switches.push_back(r.u[last]);
    }
    k = end + 1;
  }

  const double u0 = r.u.front();
  const double u_end = r.u.back();
  r.decaying = u_end <= options.absolute_floor || u_end <= options.decay_fraction * u0;
  r.flagged = !r.decaying;
  std::ostringstream os;
  os << "U(t0) = " << u0 << ", U(t_end) = " << u_end << ", " << r.jumps.size()
     << " switches, max jump ratio " << r.max_jump_ratio << (r.decaying ? ", decaying" : ", NOT decaying");
  r.summary = os.str();
  return r;
}

double two_case_margin(const Polynomial& rho_bar, double v, double beta, double lambda) {
  const double left = rho_bar(v) * (-lambda * v + beta);
  const double right = -(lambda / 2.0) * rho_bar(v) * v + rho_bar((2.0 / lambda) * beta) * beta;
  return right - left;
}

}  // namespace coopstab
