#include "coopstab/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace coopstab {

std::vector<std::vector<Eigen::VectorXd>> agent_disturbance_vertices(
    const std::vector<AgentModel>& agents, const DisturbanceBox& disturbance) {
  std::vector<std::vector<Eigen::VectorXd>> out;
  int off = 0;
  for (const auto& a : agents) {
    if (off + a.nd() > disturbance.dim())
      throw std::invalid_argument("disturbance box is smaller than the agents require");
    out.push_back(box_vertices(disturbance.lower().segment(off, a.nd()),
                               disturbance.upper().segment(off, a.nd())));
    off += a.nd();
  }
  return out;
}

namespace {

// Even polynomial in e as a polynomial in e^2.
Polynomial even_part_in_square(const Polynomial& p, const std::string& what) {
  std::vector<double> c;
  for (int k = 0; k <= p.degree(); ++k) {
    if (k % 2 == 1) {
      if (p.coefficient(k) != 0.0) throw std::invalid_argument(what + " must be even in e");
      continue;
    }
    c.push_back(p.coefficient(k));
  }
  return Polynomial(c);
}

}  // namespace

NumericSynthesisResult synthesize_numeric(const std::vector<AgentModel>& agents,
                                          const TopologySet& topology,
                                          const DisturbanceBox& disturbance,
                                          const NumericSynthesisOptions& options) {
  if (agents.empty()) throw std::invalid_argument("no agents");
  if (!(options.lambda_bar_fraction > 0.0 && options.lambda_bar_fraction < 1.0))
    throw std::invalid_argument("lambda_bar_fraction must lie in (0, 1)");
  const auto dverts = agent_disturbance_vertices(agents, disturbance);

  NumericSynthesisResult res;
  std::vector<AgentBounds> bounds;
  double lambda0 = std::numeric_limits<double>::infinity();
  double c0 = std::numeric_limits<double>::infinity();
  double b_min = std::numeric_limits<double>::infinity();
  double b_max = 0.0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    const std::string tag = "agent " + std::to_string(i + 1);
    if (!a.iss()) throw std::invalid_argument(tag + " has no exp-ISS certificate");
    if (options.z_box.lower.size() != a.nz()) throw std::invalid_argument(tag + ": z box dimension mismatch");
    const auto& iss = *a.iss();
    b_min = std::min(b_min, a.b_min());
    b_max = std::max(b_max, a.b_max());

    AgentSynthesis s;
    s.split = bound_split([&a](const Eigen::VectorXd& z, double e, const Eigen::VectorXd& d) { return a.g(z, e, d); },
                          options.z_box, options.e_lo, options.e_hi, dverts[i], options.split);

    // V_bar >= (V/2) rho_bar(V/2) >= gamma once rho_bar(alpha1/2) alpha1/2 >= gamma.
    const double z_radius = std::max(options.z_box.lower.cwiseAbs().norm(), options.z_box.upper.cwiseAbs().norm());
    const Polynomial gamma_sq = s.split.gamma_sq;
    if (gamma_sq.is_zero()) {
      s.rho_bar = Polynomial::constant(1.0);
    } else {
      s.rho_bar = choose_rho([&iss](double r) { return iss.alpha1(r) / 2.0; },
                             [&gamma_sq](double r) { return gamma_sq(r * r); }, 0.0, std::max(z_radius, 1e-3),
                             options.rho);
    }

    SupplyPair base{iss.value, iss.gradient, iss.alpha1, iss.alpha2, iss.lambda, iss.supply};
    const ScaledLyapunov scaled = transform_supply(base, s.rho_bar);
    s.pi_bar_sq = even_part_in_square(scaled.beta_bar(), tag + " supply");
    s.lambda = iss.lambda;
    s.lambda_bar = options.lambda_bar_fraction * iss.lambda / 2.0;
    s.c_bar = iss.lambda / 2.0 - s.lambda_bar;
    lambda0 = std::min(lambda0, s.lambda_bar);
    c0 = std::min(c0, s.c_bar);

    SamplePlan plan;
    plan.state_lower = options.z_box.lower;
    plan.state_upper = options.z_box.upper;
    plan.state_step = options.verify_step;
    plan.input_lower = options.e_lo;
    plan.input_upper = options.e_hi;
    plan.input_step = options.verify_step;
    plan.disturbances = dverts[i];
    plan.seed = options.split.seed;
    s.strong_iss = verify_strong_supply_inequality(
        [&a](const Eigen::VectorXd& z, double e, const Eigen::VectorXd& d) { return a.f(z, e, d); },
        [&scaled](const Eigen::VectorXd& z) { return scaled.value(z); },
        [&scaled](const Eigen::VectorXd& z) { return scaled.gradient(z); }, s.lambda_bar, s.c_bar,
        [&gamma_sq](const Eigen::VectorXd& z) { return gamma_sq(z.squaredNorm()); },
        [&scaled](double e) { return scaled.beta_bar()(e); }, plan, 1e-9, tag + " strong exp-ISS");

    bounds.push_back({s.split.chi_sq, s.pi_bar_sq});
    res.agents.push_back(std::move(s));
  }

  const auto validation = validate_topology_set(topology);
  if (!validation.ok()) {
    std::string why = "topology not certified";
    for (const auto& d : validation.diagnostics) why += "; p=" + std::to_string(d.p) + ": " + d.reason;
    throw std::invalid_argument(why);
  }
  res.certificates = validation.certificates;
  const auto cc = coupling_constants(res.certificates, topology.matrices(), b_min, b_max);
  res.gain = synthesize_gain(cc, lambda0, c0, topology.matrices(), bounds, options.gain);
  for (const auto& s : res.agents)
    if (!s.strong_iss.holds) res.gain.invariants_hold = false;
  return res;
}

}  // namespace coopstab
