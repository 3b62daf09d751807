#include "coopstab/regulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "coopstab/error.hpp"

namespace coopstab {

SpectrumReport validate_exosystem(const Eigen::MatrixXd& s, double tol) {
  if (s.rows() != s.cols()) throw std::invalid_argument("exosystem matrix must be square");
  SpectrumReport r;
  const Eigen::Index n = s.rows();
  if (n == 0) {
    r.issues.push_back("empty exosystem");
    return r;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(s);
  const Eigen::VectorXcd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < n; ++i) r.eigenvalues.push_back(ev(i));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(ev(i).real()) > tol) {
      std::ostringstream os;
      os << "eigenvalue " << ev(i) << " has nonzero real part";
      r.issues.push_back(os.str());
    }
  }
  // Semi-simplicity: rank(S - lambda I) == n - algebraic multiplicity.
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  const double cluster = 1e-6 * std::max(1.0, s.norm());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (seen[static_cast<std::size_t>(i)]) continue;
    Eigen::Index mult = 0;
    for (Eigen::Index j = i; j < n; ++j) {
      if (std::abs(ev(j) - ev(i)) <= cluster) {
        seen[static_cast<std::size_t>(j)] = true;
        ++mult;
      }
    }
    const Eigen::MatrixXcd shifted =
        s.cast<std::complex<double>>() - ev(i) * Eigen::MatrixXcd::Identity(n, n);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(shifted);
    lu.setThreshold(1e-8);
    if (lu.rank() != n - mult) {
      std::ostringstream os;
      os << "eigenvalue " << ev(i) << " is not semi-simple (rank " << lu.rank() << ", multiplicity "
         << mult << ")";
      r.issues.push_back(os.str());
    }
  }
  r.valid = r.issues.empty();
  return r;
}

Eigen::MatrixXd harmonic_exosystem(double omega) {
  Eigen::MatrixXd s(2, 2);
  s << 0.0, omega, -omega, 0.0;
  return s;
}

Eigen::VectorXd characteristic_polynomial(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("characteristic polynomial needs a square matrix");
  // Faddeev-LeVerrier.
  const Eigen::Index n = a.rows();
  Eigen::VectorXd c(n + 1);
  c(n) = 1.0;
  Eigen::MatrixXd mk = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    mk = a * mk + c(n - k + 1) * Eigen::MatrixXd::Identity(n, n);
    c(n - k) = -(a * mk).trace() / static_cast<double>(k);
  }
  return c.head(n);
}

Eigen::MatrixXd companion_matrix(const Eigen::VectorXd& a) {
  const Eigen::Index n = a.size();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) c(i, i + 1) = 1.0;
  if (n > 0) c.row(n - 1) = -a.transpose();
  return c;
}

Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& m,
                                const Eigen::MatrixXd& rhs) {
  const Eigen::Index n = phi.rows();
  const Eigen::Index r = m.rows();
  if (phi.cols() != n || m.cols() != r || rhs.rows() != r || rhs.cols() != n)
    throw std::invalid_argument("Sylvester dimensions do not match");
  const Eigen::VectorXcd lp = phi.eigenvalues();
  const Eigen::VectorXcd lm = m.eigenvalues();
  for (Eigen::Index i = 0; i < lp.size(); ++i)
    for (Eigen::Index j = 0; j < lm.size(); ++j)
      if (std::abs(lp(i) - lm(j)) < 1e-9)
        throw std::invalid_argument("spectra of M and Phi overlap");
  // vec(T Phi - M T) = (Phi^T (x) I - I (x) M) vec(T), column-major vec.
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(r * n, r * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      k.block(a * r, b * r, r, r) += phi(b, a) * Eigen::MatrixXd::Identity(r, r);
    }
    k.block(a * r, a * r, r, r) -= m;
  }
  const Eigen::VectorXd vec = Eigen::Map<const Eigen::VectorXd>(rhs.data(), r * n);
  const Eigen::VectorXd sol = k.fullPivLu().solve(vec);
  return Eigen::Map<const Eigen::MatrixXd>(sol.data(), r, n);
}

InternalModel build_internal_model(const Eigen::MatrixXd& phi, const Eigen::RowVectorXd& gamma,
                                   const Eigen::MatrixXd& m, const Eigen::VectorXd& n) {
  const Eigen::Index s = m.rows();
  if (m.cols() != s || n.size() != s) throw std::invalid_argument("M and N dimensions do not match");
  if (phi.rows() != phi.cols() || gamma.size() != phi.rows())
    throw std::invalid_argument("Phi and Gamma dimensions do not match");
  if (phi.rows() != s) throw std::invalid_argument("internal model dimension must match the generator");
  if (m.eigenvalues().real().maxCoeff() >= 0.0) throw std::invalid_argument("M is not Hurwitz");
  Eigen::MatrixXd ctrb(s, s);
  Eigen::VectorXd col = n;
  for (Eigen::Index k = 0; k < s; ++k) {
    ctrb.col(k) = col;
    col = m * col;
  }
  if (Eigen::FullPivLU<Eigen::MatrixXd>(ctrb).rank() != s)
    throw std::invalid_argument("(M, N) is not controllable");

  InternalModel im;
  im.m = m;
  im.n = n;
  im.phi = phi;
  im.gamma = gamma;
  im.t = solve_sylvester(phi, m, n * gamma);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(im.t);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  im.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(smin > 1e-12 * smax) || smax == 0.0) {
    std::ostringstream os;
    os << "Sylvester solution T is singular (condition number " << im.condition_number << ")";
    throw ValidationError(os.str());
  }
  im.psi = gamma * im.t.inverse();
  im.sylvester_residual = (im.t * phi - m * im.t - n * gamma).norm();
  im.psi_residual = (im.psi * im.t - gamma).norm();
  return im;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> default_internal_model_pair(int dim) {
  if (dim < 1) throw std::invalid_argument("internal model dimension must be positive");
  // Ascending coefficients of (s+1)(s+2)...(s+dim).
  std::vector<double> poly{1.0};
  for (int r = 1; r <= dim; ++r) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      next[k] += r * poly[k];
      next[k + 1] += poly[k];
    }
    poly = next;
  }
  Eigen::VectorXd a(dim);
  for (int k = 0; k < dim; ++k) a(k) = poly[static_cast<std::size_t>(k)];
  Eigen::VectorXd n = Eigen::VectorXd::Zero(dim);
  n(dim - 1) = 1.0;
  return {companion_matrix(a), n};
}

RegulationController::RegulationController(std::vector<InternalModel> models,
                                           SwitchedController stabilizer)
    : models_(std::move(models)), stabilizer_(std::move(stabilizer)) {
  if (static_cast<int>(models_.size()) != stabilizer_.agents())
    throw std::invalid_argument("internal model count does not match the stabilizer");
  for (const auto& m : models_) {
    offsets_.push_back(eta_total_);
    eta_total_ += m.dim();
  }
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> RegulationController::evaluate(
    const Eigen::VectorXd& ev, const Eigen::VectorXd& eta) const {
  if (ev.size() != agents() || eta.size() != eta_total_)
    throw std::invalid_argument("regulation controller input dimension mismatch");
  Eigen::VectorXd u(agents());
  Eigen::VectorXd eta_dot(eta_total_);
  for (int i = 0; i < agents(); ++i) {
    const auto& im = models_[static_cast<std::size_t>(i)];
    const Eigen::VectorXd ei = eta.segment(offsets_[i], im.dim());
    u(i) = stabilizer_.control(i, ev(i)) + im.psi.dot(ei);
    eta_dot.segment(offsets_[i], im.dim()) = im.m * ei + im.n * u(i);
  }
  return {u, eta_dot};
}

RegulationController regulation_controller(std::vector<InternalModel> models,
                                           const SwitchedController& stabilizer) {
  return RegulationController(std::move(models), stabilizer);
}

Eigen::VectorXd augmented_rhs(const std::vector<AugmentedAgent>& agents, const Eigen::MatrixXd& h,
                              const SwitchedController& stabilizer, const Eigen::VectorXd& d,
                              const Eigen::VectorXd& x) {
  const auto n = static_cast<Eigen::Index>(agents.size());
  if (h.rows() != n || h.cols() != n) throw std::invalid_argument("H does not match the agent count");
  Eigen::Index total = 0;
  for (const auto& a : agents) total += a.dim();
  if (x.size() != total) throw std::invalid_argument("augmented state dimension mismatch");

  Eigen::VectorXd e(n);
  Eigen::Index off = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& a = agents[static_cast<std::size_t>(i)];
    e(i) = x(off + a.dim() - 1);
    off += a.dim();
  }
  const Eigen::VectorXd u_bar = stabilizer.evaluate(h * e);
  Eigen::VectorXd dx(total);
  off = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& a = agents[static_cast<std::size_t>(i)];
    const auto& im = a.model;
    const Eigen::VectorXd z = x.segment(off, a.nz);
    const Eigen::VectorXd eta = x.segment(off + a.nz, im.dim());
    const double g = a.g_bar ? a.g_bar(z, e(i), d) : 0.0;
    if (a.nz > 0) dx.segment(off, a.nz) = a.f_bar(z, e(i), d);
    dx.segment(off + a.nz, im.dim()) = im.m * eta + im.m * im.n * (e(i) / a.b) - im.n * (g / a.b);
    dx(off + a.dim() - 1) = g + a.b * im.psi.dot(eta) + im.psi.dot(im.n) * e(i) + a.b * u_bar(i);
    off += a.dim();
  }
  return dx;
}

RegulationDemoConfig default_regulation_demo() {
  RegulationDemoConfig c;
  Eigen::MatrixXd h1(3, 3);
  h1 << 2, 0, -1, -1, 1, 0, -1, 0, 2;
  Eigen::MatrixXd h2(3, 3);
  h2 << 1, 0, 0, 0, 2, -1, -1, -1, 2;
  c.topology = TopologySet::from_matrices({h1, h2});
  c.signal = periodic_two_phase(6.0, c.integrator.t_end);
  return c;
}

namespace {

Eigen::RowVectorXd output_map(const RegulationDemoConfig& c) {
  if (c.q.size() > 0) return c.q;
  Eigen::RowVectorXd q = Eigen::RowVectorXd::Zero(c.s.rows());
  q(0) = 1.0;
  return q;
}

int demo_agents(const RegulationDemoConfig& c) {
  const auto n = static_cast<int>(c.w.size());
  if (n == 0 || static_cast<int>(c.b.size()) != n)
    throw std::invalid_argument("regulation demo needs matching w and b lists");
  if (c.y0.size() != n) throw std::invalid_argument("y0 size does not match the agent count");
  if (c.v0.size() != c.s.rows()) throw std::invalid_argument("v0 size does not match S");
  if (c.topology.followers() != n) throw std::invalid_argument("topology size does not match the agent count");
  if (c.stabilizer.agents() != n) throw std::invalid_argument("stabilizer size does not match the agent count");
  if (c.signal.max_value() > c.topology.size())
    throw std::invalid_argument("switching signal refers to a missing topology");
  for (double b : c.b)
    if (b == 0.0) throw std::invalid_argument("input gain b must be nonzero");
  return n;
}

}  // namespace

SteadyStateGenerator demo_steady_state_generator(const Eigen::MatrixXd& s,
                                                 const Eigen::RowVectorXd& q, double w, double b) {
  const Eigen::Index n = s.rows();
  SteadyStateGenerator g;
  g.phi = companion_matrix(characteristic_polynomial(s));
  g.gamma = Eigen::RowVectorXd::Zero(n);
  g.gamma(0) = 1.0;
  g.tau_of_v.resize(n, n);
  Eigen::RowVectorXd row = (q * s - w * q) / b;
  for (Eigen::Index k = 0; k < n; ++k) {
    g.tau_of_v.row(k) = row;
    row = row * s;
  }
  return g;
}

std::vector<InternalModel> build_demo_internal_models(const RegulationDemoConfig& config) {
  const int n = demo_agents(config);
  const auto spectrum = validate_exosystem(config.s);
  if (!spectrum.valid) {
    std::string why = "exosystem invalid";
    for (const auto& issue : spectrum.issues) why += "; " + issue;
    throw ValidationError(why);
  }
  const auto dim = static_cast<int>(config.s.rows());
  auto [m_default, n_default] = default_internal_model_pair(dim);
  const Eigen::MatrixXd m = config.m.value_or(m_default);
  const Eigen::VectorXd nn = config.n.value_or(n_default);
  const Eigen::RowVectorXd q = output_map(config);
  std::vector<InternalModel> models;
  for (int i = 0; i < n; ++i) {
    const auto gen = demo_steady_state_generator(config.s, q, config.w[static_cast<std::size_t>(i)],
                                                 config.b[static_cast<std::size_t>(i)]);
    models.push_back(build_internal_model(gen.phi, gen.gamma, m, nn));
  }
  return models;
}

RegulationResult run_regulation_demo(const RegulationDemoConfig& config) {
  RegulationResult res;
  res.models = build_demo_internal_models(config);
  const int n = demo_agents(config);
  const auto nv = static_cast<int>(config.s.rows());
  const RegulationController ctrl(res.models, config.stabilizer);
  const int ne = ctrl.eta_dim();
  const Eigen::RowVectorXd q = output_map(config);

  Eigen::VectorXd x0(n + ne + nv);
  x0.head(n) = config.y0;
  if (config.eta0.size() == 0) {
    x0.segment(n, ne).setZero();
  } else if (config.eta0.size() == ne) {
    x0.segment(n, ne) = config.eta0;
  } else {
    throw std::invalid_argument("eta0 size does not match the internal models");
  }
  x0.tail(nv) = config.v0;

  PiecewiseSystem ps;
  ps.dim = static_cast<int>(x0.size());
  ps.breakpoints = config.signal.switch_times();
  ps.label = [&config](double t) { return config.signal.value_at(t); };
  ps.freeze = [&, n, ne, nv](double t) -> SmoothField {
    const Eigen::MatrixXd h = config.topology.matrix(config.signal.value_at(t));
    return [&, h, n, ne, nv](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
      const Eigen::VectorXd y = x.head(n);
      const Eigen::VectorXd v = x.tail(nv);
      const Eigen::VectorXd e = y.array() - q.dot(v);
      const auto [u, eta_dot] = ctrl.evaluate(h * e, x.segment(n, ne));
      dx.resize(x.size());
      for (int i = 0; i < n; ++i)
        dx(i) = config.b[static_cast<std::size_t>(i)] * u(i) + config.w[static_cast<std::size_t>(i)] * y(i);
      dx.segment(n, ne) = eta_dot;
      dx.tail(nv) = config.s * v;
    };
  };
  res.trajectory = integrate(ps, x0, config.integrator);

  for (int i = 0; i < n; ++i) res.columns.push_back("y" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < res.models[static_cast<std::size_t>(i)].dim(); ++k)
      res.columns.push_back("eta" + std::to_string(i + 1) + "_" + std::to_string(k + 1));
  for (int k = 0; k < nv; ++k) res.columns.push_back("v" + std::to_string(k + 1));

  const auto errors = demo_tracking_errors(config, res.trajectory);
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (res.trajectory.times[k] >= config.settle_time)
      res.max_error_after_settle = std::max(res.max_error_after_settle, errors[k].cwiseAbs().maxCoeff());
  }
  const Eigen::VectorXd& last = errors.back();
  res.errors_at_end.assign(last.data(), last.data() + last.size());
  for (const auto& m : res.models) {
    res.max_sylvester_residual = std::max(res.max_sylvester_residual, m.sylvester_residual);
    res.max_psi_residual = std::max(res.max_psi_residual, m.psi_residual);
  }
  res.success = res.trajectory.times.back() >= config.settle_time &&
                res.max_error_after_settle < config.tolerance;
  return res;
}

Trajectory simulate_augmented(const RegulationDemoConfig& config,
                              const std::vector<InternalModel>& models) {
  const int n = demo_agents(config);
  if (static_cast<int>(models.size()) != n) throw std::invalid_argument("one internal model per agent required");
  const Eigen::RowVectorXd q = output_map(config);
  std::vector<AugmentedAgent> agents;
  int total = 0;
  for (int i = 0; i < n; ++i) {
    AugmentedAgent a;
    a.nz = 0;
    a.b = config.b[static_cast<std::size_t>(i)];
    a.model = models[static_cast<std::size_t>(i)];
    const double w = config.w[static_cast<std::size_t>(i)];
    a.g_bar = [w](const Eigen::VectorXd&, double e, const Eigen::VectorXd&) { return w * e; };
    total += a.dim();
    agents.push_back(std::move(a));
  }

  // eta~ = eta - T tau(v) - N b^{-1} e.
  Eigen::VectorXd x0(total);
  int off = 0;
  int eta_off = 0;
  for (int i = 0; i < n; ++i) {
    const auto& a = agents[static_cast<std::size_t>(i)];
    const auto gen = demo_steady_state_generator(config.s, q, config.w[static_cast<std::size_t>(i)], a.b);
    const double e0 = config.y0(i) - q.dot(config.v0);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(a.model.dim());
    if (config.eta0.size() > 0) eta = config.eta0.segment(eta_off, a.model.dim());
    x0.segment(off, a.model.dim()) = eta - a.model.t * gen.tau_of_v * config.v0 - a.model.n * (e0 / a.b);
    x0(off + a.dim() - 1) = e0;
    off += a.dim();
    eta_off += a.model.dim();
  }

  PiecewiseSystem ps;
  ps.dim = total;
  ps.breakpoints = config.signal.switch_times();
  ps.label = [&config](double t) { return config.signal.value_at(t); };
  ps.freeze = [&](double t) -> SmoothField {
    const Eigen::MatrixXd h = config.topology.matrix(config.signal.value_at(t));
    return [&, h](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
      dx = augmented_rhs(agents, h, config.stabilizer, Eigen::VectorXd(), x);
    };
  };
  return integrate(ps, x0, config.integrator);
}

std::vector<Eigen::VectorXd> demo_tracking_errors(const RegulationDemoConfig& config,
                                                  const Trajectory& original) {
  const int n = static_cast<int>(config.w.size());
  const auto nv = static_cast<Eigen::Index>(config.s.rows());
  const Eigen::RowVectorXd q = output_map(config);
  std::vector<Eigen::VectorXd> out;
  out.reserve(original.size());
  for (const auto& x : original.states)
    out.emplace_back(x.head(n).array() - q.dot(x.tail(nv)));
  return out;
}

}  // namespace coopstab
