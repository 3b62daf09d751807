#include "coopstab/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nnls.hpp"

namespace coopstab {

Eigen::VectorXd virtual_output(const Eigen::MatrixXd& h, const Eigen::VectorXd& e) {
  if (h.rows() != h.cols() || h.cols() != e.size()) {
    std::ostringstream os;
    os << "dimension mismatch: H is " << h.rows() << "x" << h.cols() << ", e has " << e.size();
    throw std::invalid_argument(os.str());
  }
  return h * e;
}

std::optional<std::string> omega_violation(const Polynomial& omega) {
  for (double c : omega.coefficients())
    if (!std::isfinite(c)) return "omega has a non-finite coefficient";
  if (!omega.has_nonnegative_coefficients()) return "omega has a negative coefficient";
  if (omega.coefficient(0) < 1.0) return "omega(0) < 1";
  return std::nullopt;
}

SwitchedController::SwitchedController(double k, std::vector<Polynomial> omega)
    : k_(k), omega_(std::move(omega)) {
  if (!(k_ > 0.0) || !std::isfinite(k_)) throw std::invalid_argument("controller gain k must be positive");
  if (omega_.empty()) throw std::invalid_argument("controller needs at least one omega");
  for (std::size_t i = 0; i < omega_.size(); ++i) {
    if (auto why = omega_violation(omega_[i]))
      throw std::invalid_argument("omega_" + std::to_string(i + 1) + ": " + *why);
  }
}

SwitchedController SwitchedController::uniform(double k, const Polynomial& omega, int agents) {
  if (agents < 1) throw std::invalid_argument("controller needs at least one agent");
  return SwitchedController(k, std::vector<Polynomial>(static_cast<std::size_t>(agents), omega));
}

Eigen::VectorXd SwitchedController::evaluate(const Eigen::VectorXd& ev) const {
  if (ev.size() != agents()) throw std::invalid_argument("e_v size does not match controller");
  Eigen::VectorXd u(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) u(i) = control(static_cast<int>(i), ev(i));
  return u;
}

namespace {

// Grid over the z box; falls back to seeded random points when the full
// tensor grid would be too large.
std::vector<Eigen::VectorXd> z_samples(const Box& box, int points, std::mt19937_64& rng) {
  const Eigen::Index nz = box.lower.size();
  std::vector<Eigen::VectorXd> out;
  const double total = std::pow(static_cast<double>(points), static_cast<double>(nz));
  if (total <= 20000.0) {
    std::vector<int> idx(static_cast<std::size_t>(nz), 0);
    while (true) {
      Eigen::VectorXd z(nz);
      for (Eigen::Index a = 0; a < nz; ++a) {
        const double t = points == 1 ? 0.5 : static_cast<double>(idx[a]) / (points - 1);
        z(a) = box.lower(a) + t * (box.upper(a) - box.lower(a));
      }
      out.push_back(z);
      Eigen::Index a = 0;
      while (a < nz && ++idx[a] == points) idx[a++] = 0;
      if (a == nz) break;
    }
    if (nz == 0) out.resize(1);
    return out;
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20000; ++k) {
    Eigen::VectorXd z(nz);
    for (Eigen::Index a = 0; a < nz; ++a) z(a) = box.lower(a) + u(rng) * (box.upper(a) - box.lower(a));
    out.push_back(z);
  }
  return out;
}

double basis_eval(const Eigen::VectorXd& c, int degree, double r2, double e2) {
  double acc = 0.0;
  double pr = 1.0;
  double pe = 1.0;
  for (int m = 0; m < degree; ++m) {
    pr *= r2;
    pe *= e2;
    acc += c(m) * pr + c(degree + m) * pe;
  }
  return acc;
}

}  // namespace

BoundSplit bound_split(const CouplingSampler& g, const Box& z_box, double e_lo, double e_hi,
                       const std::vector<Eigen::VectorXd>& d_vertices,
                       const BoundSplitOptions& options) {
  if (z_box.lower.size() != z_box.upper.size() || !(z_box.lower.array() <= z_box.upper.array()).all())
    throw std::invalid_argument("z box is empty or malformed");
  if (!(e_lo <= e_hi)) throw std::invalid_argument("e box is empty");
  if (!(options.margin >= 0.0)) throw std::invalid_argument("margin must be nonnegative");
  if (options.degree < 1 || options.grid_points < 2)
    throw std::invalid_argument("bound_split needs degree >= 1 and at least 2 grid points");
  std::vector<Eigen::VectorXd> dv = d_vertices;
  if (dv.empty()) dv.emplace_back(0);

  std::mt19937_64 rng(options.seed);
  auto zs = z_samples(z_box, options.grid_points, rng);
  std::vector<double> es;
  for (int k = 0; k < options.grid_points; ++k)
    es.push_back(e_lo + (e_hi - e_lo) * static_cast<double>(k) / (options.grid_points - 1));
  // Shrunken copies: the fit has to hold its ratio near the origin too, where
  // the lattice is coarsest relative to |Z| and |e|.
  const std::size_t nzs = zs.size();
  const std::size_t nes = es.size();
  for (double f : {0.5, 0.25, 0.1, 0.01, 1e-3}) {
    for (std::size_t k = 0; k < nzs; k += std::max<std::size_t>(1, nzs / 1000)) {
      const Eigen::VectorXd z = f * zs[k];
      if ((z.array() >= z_box.lower.array()).all() && (z.array() <= z_box.upper.array()).all()) zs.push_back(z);
    }
    for (std::size_t k = 0; k < nes; ++k) {
      const double e = f * es[k];
      if (e >= e_lo && e <= e_hi) es.push_back(e);
    }
  }

  const int deg = options.degree;
  const std::size_t rows = zs.size() * es.size() * dv.size();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows), 2 * deg);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
  Eigen::VectorXd r2s(static_cast<Eigen::Index>(rows));
  Eigen::VectorXd e2s(static_cast<Eigen::Index>(rows));
  Eigen::Index row = 0;
  for (const auto& z : zs) {
    const double r2 = z.squaredNorm();
    for (double e : es) {
      for (const auto& d : dv) {
        const double v = g(z, e, d);
        double pr = 1.0;
        double pe = 1.0;
        for (int m = 0; m < deg; ++m) {
          pr *= r2;
          pe *= e * e;
          a(row, m) = pr;
          a(row, deg + m) = pe;
        }
        y(row) = v * v;
        r2s(row) = r2;
        e2s(row) = e * e;
        ++row;
      }
    }
  }

  BoundSplit out;
  out.fit_samples = rows;
  out.seed = options.seed;
  if (y.maxCoeff() <= 0.0) {
    out.scale = 0.0;
    out.validation_samples = 0;
    return out;
  }

  Eigen::VectorXd c = detail::nnls(a, y);
  // Keep the lowest powers alive so the fit cannot vanish where |G|^2 does not.
  const double floor = 1e-8 * std::max(c.maxCoeff(), y.maxCoeff());
  c(0) = std::max(c(0), floor);
  c(deg) = std::max(c(deg), floor);

  double scale = 0.0;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    if (y(k) <= 0.0) continue;
    const double fit = basis_eval(c, deg, r2s(k), e2s(k));
    if (fit <= 0.0) throw FitError("fit vanishes where |G|^2 is positive", -y(k));
    scale = std::max(scale, y(k) / fit);
  }
  c *= scale * (1.0 + options.margin);
  out.scale = scale;

  std::vector<double> gamma(static_cast<std::size_t>(deg + 1), 0.0);
  std::vector<double> chi(static_cast<std::size_t>(deg + 1), 0.0);
  for (int m = 0; m < deg; ++m) {
    gamma[static_cast<std::size_t>(m + 1)] = c(m);
    chi[static_cast<std::size_t>(m + 1)] = c(deg + m);
  }
  out.gamma_sq = Polynomial(gamma);
  out.chi_sq = Polynomial(chi);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, dv.size() - 1);
  double min_slack = std::numeric_limits<double>::infinity();
  const Eigen::Index nz = z_box.lower.size();
  for (int k = 0; k < options.validation_samples; ++k) {
    Eigen::VectorXd z(nz);
    for (Eigen::Index i = 0; i < nz; ++i)
      z(i) = z_box.lower(i) + unit(rng) * (z_box.upper(i) - z_box.lower(i));
    const double e = e_lo + unit(rng) * (e_hi - e_lo);
    const double v = g(z, e, dv[pick(rng)]);
    const double lhs = v * v;
    const double rhs = out.gamma(z) + out.chi(e);
    const double slack = rhs - lhs;
    min_slack = std::min(min_slack, slack);
    if (slack < -1e-12 * (1.0 + lhs)) {
      std::ostringstream os;
      os << "bound split not dominating at a validation sample (residual " << slack << " at z = ["
         << z.transpose() << "], e = " << e << ")";
      throw FitError(os.str(), slack);
    }
  }
  out.min_validation_slack = options.validation_samples > 0 ? min_slack : 0.0;
  out.validation_samples = static_cast<std::size_t>(std::max(options.validation_samples, 0));
  return out;
}

double gain_lower_bound(const CouplingConstants& cc, double epsilon2, double lambda0) {
  if (!(cc.lambda1_tilde > 0.0)) throw std::domain_error("degenerate coupling");
  const double dm = cc.d_max;
  const double bm = cc.b_max;
  return (epsilon2 * dm * dm * bm * bm + lambda0 * dm * bm + 1.0) / cc.lambda1_tilde;
}

double gain_slack(const CouplingConstants& cc, double k, double epsilon2, double lambda0) {
  const double dm = cc.d_max;
  const double bm = cc.b_max;
  return k * cc.lambda1_tilde - epsilon2 * dm * dm * bm * bm - lambda0 * dm * bm - 1.0;
}

SwitchedController GainSynthesisReport::controller() const {
  std::vector<Polynomial> omega;
  for (const auto& a : agents) omega.push_back(a.omega);
  return SwitchedController(k_chosen, std::move(omega));
}

namespace {

// Running maximum of rho_tilde over [0, y] on a uniform grid (endpoint
// included).
double running_max(const Polynomial& rho_tilde_sq, double y) {
  constexpr int kGrid = 64;
  double best = rho_tilde_sq(0.0);
  for (int k = 1; k <= kGrid; ++k) {
    const double x = y * static_cast<double>(k) / kGrid;
    best = std::max(best, rho_tilde_sq(x * x));
  }
  return best;
}

}  // namespace

GainSynthesisReport synthesize_gain(const CouplingConstants& cc, double lambda0, double c0,
                                    const std::vector<Eigen::MatrixXd>& h_matrices,
                                    const std::vector<AgentBounds>& bounds,
                                    const GainSynthesisOptions& options) {
  if (!(cc.lambda1_tilde > 0.0)) throw std::domain_error("degenerate coupling");
  if (!(c0 > 0.0)) throw std::invalid_argument("c0 must be positive");
  if (h_matrices.empty()) throw std::invalid_argument("no topologies");
  const auto n = static_cast<Eigen::Index>(bounds.size());
  for (const auto& h : h_matrices)
    if (h.rows() != n || h.cols() != n) throw std::invalid_argument("bounds do not match topology size");

  GainSynthesisReport r;
  r.mode = "numeric";
  r.certification = "certified on box only";
  r.constants = cc;
  r.lambda0 = lambda0;
  r.c0 = c0;
  const double eps2 = cc.h_norm_sq_max / c0;
  r.epsilon2 = eps2;
  const double kmin = gain_lower_bound(cc, eps2, lambda0);
  r.k_min = kmin;
  double k = std::max(kmin, options.k_request);
  while (gain_slack(cc, k, eps2, lambda0) < 0.0) k = std::nextafter(k, std::numeric_limits<double>::infinity());
  r.k_chosen = k;
  r.k_slack = gain_slack(cc, k, eps2, lambda0);

  // Cross term per agent in e_i^2 (powers >= 1).
  std::vector<Polynomial> cross;
  int degree = 0;
  for (const auto& b : bounds) {
    Polynomial c = (cc.h_norm_sq_max / eps2) * b.chi_sq + b.pi_bar_sq;
    if (!c.has_nonnegative_coefficients())
      throw std::invalid_argument("cross-term bounds need nonnegative coefficients");
    cross.push_back(c);
    degree = std::max(degree, c.degree());
  }

  // e = A e_v with A = H_p^{-1}; by the power-mean inequality
  // e_i^{2m} <= W_i^{2m-1} sum_j |A_ij| e_vj^{2m}, W_i = sum_j |A_ij|.
  std::vector<Polynomial> rho_sq(static_cast<std::size_t>(n));
  for (const auto& h : h_matrices) {
    const Eigen::MatrixXd w = h.inverse().cwiseAbs();
    const Eigen::VectorXd wsum = w.rowwise().sum();
    for (Eigen::Index j = 0; j < n; ++j) {
      std::vector<double> coeff(static_cast<std::size_t>(std::max(degree, 1)), 0.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (int m = 1; m <= cross[static_cast<std::size_t>(i)].degree(); ++m) {
          coeff[static_cast<std::size_t>(m - 1)] += cross[static_cast<std::size_t>(i)].coefficient(m) *
                                                    std::pow(wsum(i), 2 * m - 1) * w(i, j);
        }
      }
      rho_sq[static_cast<std::size_t>(j)] =
          coefficientwise_max(rho_sq[static_cast<std::size_t>(j)], Polynomial(coeff));
    }
  }

  const Polynomial half_square{0.25, 0.5, 0.25};  // ((1+s)/2)^2
  r.invariants_hold = r.k_slack.value() >= 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    AgentEnvelope env;
    std::vector<double> coeff = rho_sq[static_cast<std::size_t>(j)].coefficients();
    if (coeff.empty()) coeff.push_back(0.0);
    coeff[0] = std::max(coeff[0], 1.0);
    env.rho_tilde_sq = Polynomial(coeff);
    // Slight inflation past evaluation rounding.
    env.omega = env.rho_tilde_sq.compose(half_square) * (1.0 + 1e-9);
    env.min_slack = std::numeric_limits<double>::infinity();
    env.min_delta = std::numeric_limits<double>::infinity();
    for (int s_idx = 0; s_idx < options.validation_samples; ++s_idx) {
      const double s = options.validation_samples == 1
                           ? 0.0
                           : options.validation_range * static_cast<double>(s_idx) /
                                 (options.validation_samples - 1);
      const double delta = running_max(env.rho_tilde_sq, 0.5 * (1.0 + s * s));
      env.min_slack = std::min(env.min_slack, env.omega(s * s) - delta);
      env.min_delta = std::min(env.min_delta, delta);
    }
    if (env.min_slack < 0.0 || env.min_delta < 1.0) r.invariants_hold = false;
    r.agents.push_back(env);
  }
  r.validation_samples = static_cast<std::size_t>(std::max(options.validation_samples, 0));
  return r;
}

GainSynthesisReport manual_gain_report(const SwitchedController& controller,
                                       const CouplingConstants& cc,
                                       std::optional<double> lambda0,
                                       std::optional<double> epsilon2) {
  GainSynthesisReport r;
  r.mode = "manual";
  r.certification = "user supplied; synthesis constants not certified";
  r.constants = cc;
  r.k_chosen = controller.k();
  r.lambda0 = lambda0;
  r.epsilon2 = epsilon2;
  bool ok = true;
  for (const auto& w : controller.omega()) {
    AgentEnvelope env;
    env.omega = w;
    env.min_delta = w(0.0);
    ok = ok && !omega_violation(w);
    r.agents.push_back(env);
  }
  if (lambda0 && epsilon2 && cc.lambda1_tilde > 0.0) {
    r.k_min = gain_lower_bound(cc, *epsilon2, *lambda0);
    r.k_slack = gain_slack(cc, controller.k(), *epsilon2, *lambda0);
    ok = ok && *r.k_slack >= 0.0;
  }
  r.invariants_hold = ok;
  return r;
}

}  // namespace coopstab
