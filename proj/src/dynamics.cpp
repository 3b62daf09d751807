#include "coopstab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coopstab {

AgentModel::AgentModel(std::string kind, int nz, int nd, SubsystemField f, CouplingField g,
                       double b, double b_min, double b_max)
    : kind_(std::move(kind)),
      nz_(nz),
      nd_(nd),
      f_(std::move(f)),
      g_(std::move(g)),
      b_abs_(std::abs(b)),
      input_sign_(b < 0.0 ? -1.0 : 1.0),
      b_min_(b_min),
      b_max_(b_max) {
  if (nz < 0 || nd < 0) throw std::invalid_argument("agent dimensions must be nonnegative");
  if (!(b_min > 0.0) || b_max < b_min) {
    throw std::invalid_argument("agent input-gain bounds need 0 < b_min <= b_max");
  }
  if (b_abs_ < b_min || b_abs_ > b_max) {
    throw std::invalid_argument("agent |b| outside [b_min, b_max]");
  }
}

double AgentModel::origin_residual(const std::vector<Eigen::VectorXd>& disturbances) const {
  const Eigen::VectorXd z0 = Eigen::VectorXd::Zero(nz_);
  double worst = 0.0;
  for (const auto& d : disturbances) {
    if (nz_ > 0) worst = std::max(worst, f_(z0, 0.0, d).lpNorm<Eigen::Infinity>());
    worst = std::max(worst, std::abs(g_(z0, 0.0, d)));
  }
  return worst;
}

Eigen::Vector3d lorenz_rhs(const Eigen::Vector2d& z, double e, double u_bar,
                           const Eigen::Vector3d& l_bar, const Eigen::Vector3d& d, double b) {
  const Eigen::Vector3d l = l_bar + d;
  if (!(l(0) > 0.0 && l(1) < 0.0 && l(2) > 0.0)) {
    throw std::invalid_argument("Lorenz parameters need L1 > 0, L2 < 0, L3 > 0");
  }
  return {-l(0) * z(0) + l(0) * e, l(1) * z(1) + z(0) * e,
          l(2) * z(0) - e - z(0) * z(1) + b * u_bar};
}

AgentModel make_lorenz_agent(const Eigen::Vector3d& l_bar, double b, double d_bound) {
  if (d_bound < 0.0) throw std::invalid_argument("d_bound must be nonnegative");
  const Eigen::Vector3d bound = Eigen::Vector3d::Constant(d_bound);
  for (const auto& d : box_vertices(-bound, bound)) {
    const Eigen::Vector3d l = l_bar + d;
    if (!(l(0) > 0.0 && l(1) < 0.0 && l(2) > 0.0)) {
      throw std::invalid_argument("Lorenz parameters need L1 > 0, L2 < 0, L3 > 0 on the d-box");
    }
  }
  auto f = [l_bar](const Eigen::VectorXd& z, double e, const Eigen::VectorXd& d) {
    const double l1 = l_bar(0) + d(0);
    const double l2 = l_bar(1) + d(1);
    Eigen::VectorXd out(2);
    out << -l1 * z(0) + l1 * e, l2 * z(1) + z(0) * e;
    return out;
  };
  auto g = [l_bar](const Eigen::VectorXd& z, double e, const Eigen::VectorXd& d) {
    const double l3 = l_bar(2) + d(2);
    return l3 * z(0) - e - z(0) * z(1);
  };
  const double bm = std::abs(b);
  AgentModel agent("lorenz", 2, 3, f, g, b, bm, bm);

  IssCertificateData iss;
  iss.value = [](const Eigen::VectorXd& z) {
    const double z1sq = z(0) * z(0);
    return 0.5 * z1sq + 0.25 * z1sq * z1sq + 0.5 * z(1) * z(1);
  };
  iss.gradient = [](const Eigen::VectorXd& z) {
    Eigen::VectorXd grad(2);
    grad << z(0) + z(0) * z(0) * z(0), z(1);
    return grad;
  };
  iss.alpha1 = [](double s) { return 0.5 * s * s; };
  iss.alpha2 = [](double s) { return 0.5 * s * s + 0.25 * s * s * s * s; };
  iss.lambda = 4.6;
  iss.supply = Polynomial{0.0, 0.0, 5.2, 0.0, 26.5};
  agent.set_iss(std::move(iss));
  return agent;
}

AgentModel make_linear_scalar_agent(double a, double c, double g_z, double g_e, double b) {
  if (!(a > 0.0)) throw std::invalid_argument("linear_scalar agent needs a > 0");
  auto f = [a, c](const Eigen::VectorXd& z, double e, const Eigen::VectorXd&) {
    Eigen::VectorXd out(1);
    out << -a * z(0) + c * e;
    return out;
  };
  auto g = [g_z, g_e](const Eigen::VectorXd& z, double e, const Eigen::VectorXd&) {
    return g_z * z(0) + g_e * e;
  };
  const double bm = std::abs(b);
  AgentModel agent("linear_scalar", 1, 0, f, g, b, bm, bm);
  IssCertificateData iss;
  iss.value = [](const Eigen::VectorXd& z) { return 0.5 * z(0) * z(0); };
  iss.gradient = [](const Eigen::VectorXd& z) { return Eigen::VectorXd(z); };
  iss.alpha1 = [](double s) { return 0.5 * s * s; };
  iss.alpha2 = [](double s) { return 0.5 * s * s; };
  iss.lambda = a;
  iss.supply = Polynomial{0.0, 0.0, c * c / (2.0 * a)};
  agent.set_iss(std::move(iss));
  return agent;
}

std::vector<Eigen::VectorXd> box_vertices(const Eigen::VectorXd& lower,
                                          const Eigen::VectorXd& upper) {
  const Eigen::Index n = lower.size();
  if (upper.size() != n) throw std::invalid_argument("box bounds differ in size");
  if (n > 20) throw std::length_error("box has too many dimensions to enumerate vertices");
  std::vector<Eigen::VectorXd> out;
  const std::size_t count = std::size_t{1} << n;
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    Eigen::VectorXd v(n);
    for (Eigen::Index k = 0; k < n; ++k) v(k) = (mask >> k) & 1U ? upper(k) : lower(k);
    out.push_back(std::move(v));
  }
  return out;
}

DisturbanceBox::DisturbanceBox(Eigen::VectorXd lower, Eigen::VectorXd upper,
                               Eigen::VectorXd value)
    : lower_(std::move(lower)), upper_(std::move(upper)), values_{std::move(value)} {
  validate();
}

DisturbanceBox::DisturbanceBox(Eigen::VectorXd lower, Eigen::VectorXd upper,
                               std::vector<double> times, std::vector<Eigen::VectorXd> values)
    : lower_(std::move(lower)),
      upper_(std::move(upper)),
      times_(std::move(times)),
      values_(std::move(values)) {
  validate();
}

void DisturbanceBox::validate() const {
  if (lower_.size() != upper_.size()) throw std::invalid_argument("disturbance box size mismatch");
  if ((lower_.array() > upper_.array()).any()) {
    throw std::invalid_argument("disturbance box has lower > upper");
  }
  if (values_.size() != times_.size() + 1) {
    throw std::invalid_argument("disturbance schedule needs len(values) == len(times) + 1");
  }
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) {
      throw std::invalid_argument("disturbance schedule times must increase");
    }
  }
  for (const auto& v : values_) {
    if (v.size() != lower_.size()) throw std::invalid_argument("disturbance value size mismatch");
    if ((v.array() < lower_.array()).any() || (v.array() > upper_.array()).any()) {
      throw std::invalid_argument("disturbance value outside its box");
    }
  }
}

Eigen::VectorXd DisturbanceBox::value_at(double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return values_[static_cast<std::size_t>(it - times_.begin())];
}

bool DisturbanceBox::contains_zero() const {
  return (lower_.array() <= 0.0).all() && (upper_.array() >= 0.0).all();
}

std::vector<Eigen::VectorXd> DisturbanceBox::vertices() const {
  return box_vertices(lower_, upper_);
}

}  // namespace coopstab
