#include "coopstab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "coopstab/error.hpp"
#include "coopstab/lyapunov.hpp"

namespace coopstab {

using nlohmann::json;

namespace {

// ---- reading helpers -------------------------------------------------------

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string join(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join(path, key), "missing required field");
  return *it;
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "expected a finite number");
  return x;
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  return as_number(obj.at(key), join(path, key));
}

int int_or(const json& obj, const std::string& key, int fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<int>();
}

std::vector<double> as_vector(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_number(v[k], join(field, k)));
  return out;
}

Eigen::VectorXd as_eigen(const json& v, const std::string& field) {
  const auto x = as_vector(v, field);
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

Eigen::MatrixXd as_matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw ConfigError(field, "expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = as_vector(v[static_cast<std::size_t>(r)], join(field, static_cast<std::size_t>(r)));
    if (r == 0) m.resize(rows, static_cast<Eigen::Index>(row.size()));
    if (static_cast<Eigen::Index>(row.size()) != m.cols()) throw ConfigError(field, "rows have different lengths");
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

// ---- writing helpers -------------------------------------------------------

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const Polynomial& p) {
  json j = p.coefficients();
  if (p.coefficients().empty()) j = json::array({0.0});
  return j;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json to_json(const VerificationReport& r) {
  return {{"check", r.check},
          {"plan", r.plan},
          {"holds", r.holds},
          {"worst_margin", r.worst_margin},
          {"witness", {{"state", to_json(r.witness_state)}, {"input", r.witness_input},
                        {"disturbance", to_json(r.witness_disturbance)}}},
          {"samples", r.samples},
          {"seed", r.seed},
          {"scope", r.scope}};
}

json to_json(const AdtReport& r, const AdtSpec& spec) {
  return {{"tau_d", spec.tau_d},       {"N0", spec.n0},
          {"valid", r.valid},          {"worst_excess", r.worst_excess},
          {"worst_interval", {{"t", r.worst_t}, {"T", r.worst_T}, {"count", r.worst_count}}},
          {"switches_checked", r.switches_checked},
          {"truncated", r.truncated},  {"switches_dropped", r.switches_dropped}};
}

json to_json(const TopologyValidation& v, const TopologySet& set) {
  json certs = json::array();
  for (std::size_t p = 0; p < v.certificates.size(); ++p) {
    const auto& c = v.certificates[p];
    certs.push_back({{"p", p + 1},
                     {"method", c.method},
                     {"d", to_json(c.d_diag)},
                     {"min_eig_symmetrized", c.min_eig},
                     {"eigen_real_parts", to_json(c.eigen_real_parts)},
                     {"h", to_json(set.matrix(static_cast<int>(p + 1)))}});
  }
  json diags = json::array();
  for (const auto& d : v.diagnostics) diags.push_back({{"p", d.p}, {"node", d.node}, {"reason", d.reason}});
  return {{"certified", v.ok()}, {"certificates", certs}, {"diagnostics", diags}};
}

json to_json(const CouplingConstants& cc) {
  return {{"d_max", cc.d_max},
          {"d_min", cc.d_min},
          {"lambda1_tilde", cc.lambda1_tilde},
          {"h_norm_sq_max", cc.h_norm_sq_max},
          {"b_min", cc.b_min},
          {"b_max", cc.b_max}};
}

json to_json(const GainSynthesisReport& r) {
  json agents = json::array();
  for (const auto& a : r.agents) {
    agents.push_back({{"rho_tilde_sq", to_json(a.rho_tilde_sq)},
                      {"omega", to_json(a.omega)},
                      {"min_slack", a.min_slack},
                      {"min_delta", a.min_delta}});
  }
  return {{"mode", r.mode},
          {"certification", r.certification},
          {"epsilon2", optional_json(r.epsilon2)},
          {"k_min", optional_json(r.k_min)},
          {"k_chosen", r.k_chosen},
          {"lambda0", optional_json(r.lambda0)},
          {"c0", optional_json(r.c0)},
          {"k_slack", optional_json(r.k_slack)},
          {"constants", to_json(r.constants)},
          {"agents", agents},
          {"validation_samples", r.validation_samples},
          {"invariants_hold", r.invariants_hold}};
}

// ---- section parsers -------------------------------------------------------

TopologySet parse_topology(const json& t, json& eff) {
  const std::string path = "topology";
  if (!t.is_object()) throw ConfigError(path, "expected an object");
  const bool has_h = t.contains("h_matrices");
  const bool has_g = t.contains("graphs");
  if (has_h == has_g) throw ConfigError(path, "give exactly one of h_matrices or graphs");
  try {
    if (has_h) {
      const auto& list = t.at("h_matrices");
      if (!list.is_array() || list.empty()) throw ConfigError(join(path, "h_matrices"), "expected a nonempty list");
      std::vector<Eigen::MatrixXd> hs;
      for (std::size_t p = 0; p < list.size(); ++p) hs.push_back(as_matrix(list[p], join(join(path, "h_matrices"), p)));
      eff = {{"h_matrices", list}};
      return TopologySet::from_matrices(std::move(hs));
    }
    const auto& list = t.at("graphs");
    if (!list.is_array() || list.empty()) throw ConfigError(join(path, "graphs"), "expected a nonempty list");
    std::vector<LeaderDigraph> gs;
    for (std::size_t p = 0; p < list.size(); ++p) {
      const std::string field = join(join(path, "graphs"), p);
      try {
        gs.emplace_back(as_matrix(list[p], field).cast<int>());
      } catch (const std::invalid_argument& e) {
        throw ConfigError(field, e.what());
      }
    }
    eff = {{"graphs", list}};
    return TopologySet::from_graphs(std::move(gs));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

struct SignalSpec {
  std::string type;
  double t0 = 0.0;
  double period = 0.0;
  std::vector<double> times;
  std::vector<int> values;

  SwitchingSignal build(double t_end) const {
    if (type == "periodic_two_phase") return periodic_two_phase(period, t_end, t0);
    return SwitchingSignal(t0, times, values);
  }
};

SignalSpec parse_switching(const json& s, json& eff, std::optional<AdtSpec>& adt) {
  const std::string path = "switching";
  if (!s.is_object()) throw ConfigError(path, "expected an object");
  SignalSpec spec;
  const auto& type = require(s, "type", path);
  if (!type.is_string()) throw ConfigError(join(path, "type"), "expected a string");
  spec.type = type.get<std::string>();
  spec.t0 = number_or(s, "t0", 0.0, path);
  eff = {{"type", spec.type}, {"t0", spec.t0}};
  if (spec.type == "periodic_two_phase") {
    spec.period = as_number(require(s, "period", path), join(path, "period"));
    if (!(spec.period > 0.0)) throw ConfigError(join(path, "period"), "must be positive");
    eff["period"] = spec.period;
  } else if (spec.type == "explicit") {
    spec.times = as_vector(require(s, "switch_times", path), join(path, "switch_times"));
    const auto& vals = require(s, "values", path);
    if (!vals.is_array()) throw ConfigError(join(path, "values"), "expected an array of integers");
    for (std::size_t k = 0; k < vals.size(); ++k) {
      if (!vals[k].is_number_integer()) throw ConfigError(join(join(path, "values"), k), "expected an integer");
      spec.values.push_back(vals[k].get<int>());
    }
    try {
      SwitchingSignal(spec.t0, spec.times, spec.values);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, e.what());
    }
    eff["switch_times"] = spec.times;
    eff["values"] = spec.values;
  } else {
    throw ConfigError(join(path, "type"), "expected \"periodic_two_phase\" or \"explicit\"");
  }
  if (s.contains("tau_d") || s.contains("N0")) {
    AdtSpec a;
    a.tau_d = as_number(require(s, "tau_d", path), join(path, "tau_d"));
    a.n0 = number_or(s, "N0", 1.0, path);
    if (!(a.tau_d > 0.0)) throw ConfigError(join(path, "tau_d"), "must be positive");
    if (!(a.n0 >= 0.0)) throw ConfigError(join(path, "N0"), "must be nonnegative");
    adt = a;
    eff["tau_d"] = a.tau_d;
    eff["N0"] = a.n0;
  }
  if (s.contains("tau_d_threshold")) eff["tau_d_threshold"] = as_number(s.at("tau_d_threshold"), join(path, "tau_d_threshold"));
  return spec;
}

struct AgentDisturbance {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> values;
};

std::vector<AgentModel> parse_agents(const json& list, json& eff, std::vector<AgentDisturbance>& dist) {
  const std::string path = "agents";
  if (!list.is_array() || list.empty()) throw ConfigError(path, "expected a nonempty list");
  std::vector<AgentModel> agents;
  eff = json::array();
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string ap = join(path, i);
    const auto& a = list[i];
    if (!a.is_object()) throw ConfigError(ap, "expected an object");
    const auto& model = require(a, "model", ap);
    if (!model.is_string()) throw ConfigError(join(ap, "model"), "expected a string");
    const std::string kind = model.get<std::string>();
    const json params = a.value("params", json::object());
    const std::string pp = join(ap, "params");
    json e = {{"model", kind}};
    AgentDisturbance d;
    try {
      if (kind == "lorenz") {
        const Eigen::VectorXd l_bar = params.contains("L_bar") ? as_eigen(params.at("L_bar"), join(pp, "L_bar"))
                                                               : Eigen::VectorXd(Eigen::Vector3d(3.0, -3.2, 1.6));
        if (l_bar.size() != 3) throw ConfigError(join(pp, "L_bar"), "expected 3 entries");
        const double b = number_or(params, "b", 1.0, pp);
        const double bound = number_or(params, "d_bound", 0.2, pp);
        if (!(bound >= 0.0)) throw ConfigError(join(pp, "d_bound"), "must be nonnegative");
        agents.push_back(make_lorenz_agent(l_bar, b, bound));
        e["params"] = {{"L_bar", to_json(l_bar)}, {"b", b}, {"d_bound", bound}};
        d.lower = Eigen::VectorXd::Constant(3, -bound);
        d.upper = Eigen::VectorXd::Constant(3, bound);
      } else if (kind == "linear_scalar") {
        const double a_ = as_number(require(params, "a", pp), join(pp, "a"));
        const double c = number_or(params, "c", 1.0, pp);
        const double g = number_or(params, "g", 0.0, pp);
        const double h = number_or(params, "h", 0.0, pp);
        const double b = number_or(params, "b", 1.0, pp);
        agents.push_back(make_linear_scalar_agent(a_, c, g, h, b));
        e["params"] = {{"a", a_}, {"c", c}, {"g", g}, {"h", h}, {"b", b}};
        d.lower = Eigen::VectorXd(0);
        d.upper = Eigen::VectorXd(0);
      } else {
        throw ConfigError(join(ap, "model"), "unknown model \"" + kind + "\" (expected lorenz or linear_scalar)");
      }
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(pp, ex.what());
    }
    const auto nd = d.lower.size();
    if (a.contains("d")) {
      const auto& dv = a.at("d");
      const std::string dp = join(ap, "d");
      if (dv.is_array()) {
        d.values.push_back(as_eigen(dv, dp));
        e["d"] = dv;
      } else if (dv.is_object()) {
        d.times = as_vector(require(dv, "times", dp), join(dp, "times"));
        const auto& vals = require(dv, "values", dp);
        if (!vals.is_array()) throw ConfigError(join(dp, "values"), "expected a list of vectors");
        for (std::size_t k = 0; k < vals.size(); ++k) d.values.push_back(as_eigen(vals[k], join(join(dp, "values"), k)));
        if (d.values.size() != d.times.size() + 1)
          throw ConfigError(join(dp, "values"), "needs one more entry than times");
        e["d"] = {{"times", d.times}, {"values", vals}};
      } else {
        throw ConfigError(dp, "expected a vector or a {times, values} schedule");
      }
      for (std::size_t k = 0; k < d.values.size(); ++k)
        if (d.values[k].size() != nd)
          throw ConfigError(dp, "expected " + std::to_string(nd) + " components");
    } else {
      d.values.push_back(Eigen::VectorXd::Zero(nd));
      e["d"] = to_json(d.values.front());
    }
    dist.push_back(std::move(d));
    eff.push_back(e);
  }
  return agents;
}

DisturbanceBox stack_disturbance(const std::vector<AgentDisturbance>& parts) {
  Eigen::Index dim = 0;
  std::set<double> cuts;
  for (const auto& p : parts) {
    dim += p.lower.size();
    cuts.insert(p.times.begin(), p.times.end());
  }
  Eigen::VectorXd lower(dim);
  Eigen::VectorXd upper(dim);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    lower.segment(off, p.lower.size()) = p.lower;
    upper.segment(off, p.upper.size()) = p.upper;
    off += p.lower.size();
  }
  auto value_at = [&](double t) {
    Eigen::VectorXd v(dim);
    Eigen::Index o = 0;
    for (const auto& p : parts) {
      const auto k = static_cast<std::size_t>(std::upper_bound(p.times.begin(), p.times.end(), t) - p.times.begin());
      v.segment(o, p.lower.size()) = p.values[k];
      o += p.lower.size();
    }
    return v;
  };
  try {
    if (cuts.empty()) return DisturbanceBox(lower, upper, value_at(0.0));
    std::vector<double> times(cuts.begin(), cuts.end());
    std::vector<Eigen::VectorXd> values{value_at(times.front() - 1.0)};
    for (double t : times) values.push_back(value_at(t));
    return DisturbanceBox(lower, upper, times, values);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("agents", std::string("disturbance: ") + e.what());
  }
}

Eigen::VectorXd parse_initial_state(const json& s, const std::vector<AgentModel>& agents, json& eff) {
  const std::string path = "initial_state";
  if (!s.is_object()) throw ConfigError(path, "expected an object");
  const auto n = agents.size();
  int nz = 0;
  for (const auto& a : agents) nz += a.nz();
  Eigen::VectorXd x0(nz + static_cast<int>(n));
  json zs = json::array();
  if (nz > 0) {
    const auto& z = require(s, "Z", path);
    if (!z.is_array() || z.size() != n) throw ConfigError(join(path, "Z"), "expected one vector per agent");
    int off = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto zi = as_eigen(z[i], join(join(path, "Z"), i));
      if (zi.size() != agents[i].nz())
        throw ConfigError(join(join(path, "Z"), i), "expected " + std::to_string(agents[i].nz()) + " entries");
      x0.segment(off, zi.size()) = zi;
      off += static_cast<int>(zi.size());
      zs.push_back(to_json(zi));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) zs.push_back(json::array());
  }
  const auto e = as_eigen(require(s, "e", path), join(path, "e"));
  if (static_cast<std::size_t>(e.size()) != n) throw ConfigError(join(path, "e"), "expected one entry per agent");
  x0.tail(static_cast<Eigen::Index>(n)) = e;
  eff = {{"Z", zs}, {"e", to_json(e)}};
  return x0;
}

Polynomial parse_polynomial(const json& v, const std::string& field) {
  const auto c = as_vector(v, field);
  if (c.empty()) throw ConfigError(field, "expected at least one coefficient");
  return Polynomial(c);
}

ControllerSpec parse_controller(const json& c, std::size_t agents, json& eff) {
  const std::string path = "controller";
  if (!c.is_object()) throw ConfigError(path, "expected an object");
  ControllerSpec spec;
  spec.mode = c.value("mode", std::string("manual"));
  if (spec.mode == "manual") {
    spec.k = as_number(require(c, "k", path), join(path, "k"));
    if (!(spec.k > 0.0)) throw ConfigError(join(path, "k"), "must be positive");
    const auto& om = require(c, "omega", path);
    const std::string op = join(path, "omega");
    if (!om.is_array() || om.empty()) throw ConfigError(op, "expected coefficients or one coefficient list per agent");
    if (om.front().is_array()) {
      if (om.size() != agents) throw ConfigError(op, "expected one polynomial per agent");
      for (std::size_t i = 0; i < om.size(); ++i) spec.omega.push_back(parse_polynomial(om[i], join(op, i)));
    } else {
      spec.omega.assign(agents, parse_polynomial(om, op));
    }
    json list = json::array();
    for (std::size_t i = 0; i < spec.omega.size(); ++i) {
      if (auto why = omega_violation(spec.omega[i])) throw ConfigError(join(op, i), *why);
      list.push_back(to_json(spec.omega[i]));
    }
    eff = {{"mode", "manual"}, {"k", spec.k}, {"omega", list}};
    return spec;
  }
  if (spec.mode != "numeric") throw ConfigError(join(path, "mode"), "expected \"manual\" or \"numeric\"");
  auto& n = spec.numeric;
  const auto& boxes = require(c, "boxes", path);
  const std::string bp = join(path, "boxes");
  n.z_box.lower = as_eigen(require(boxes, "z_lower", bp), join(bp, "z_lower"));
  n.z_box.upper = as_eigen(require(boxes, "z_upper", bp), join(bp, "z_upper"));
  if (n.z_box.lower.size() != n.z_box.upper.size()) throw ConfigError(bp, "z_lower and z_upper differ in size");
  n.e_lo = number_or(boxes, "e_lower", -2.0, bp);
  n.e_hi = number_or(boxes, "e_upper", 2.0, bp);
  n.lambda_bar_fraction = number_or(c, "lambda_bar_fraction", 0.5, path);
  n.verify_step = number_or(c, "verify_step", 0.25, path);
  n.gain.k_request = number_or(c, "k_request", 0.0, path);
  n.gain.validation_range = number_or(c, "validation_range", 10.0, path);
  n.gain.validation_samples = int_or(c, "validation_samples", 2001, path);
  const json split = c.value("split", json::object());
  const std::string sp = join(path, "split");
  n.split.margin = number_or(split, "margin", 0.1, sp);
  n.split.degree = int_or(split, "degree", 2, sp);
  n.split.grid_points = int_or(split, "grid_points", 13, sp);
  n.split.validation_samples = int_or(split, "validation_samples", 10000, sp);
  n.split.seed = static_cast<std::uint64_t>(int_or(split, "seed", 7, sp));
  const json rho = c.value("rho", json::object());
  n.rho.degree = int_or(rho, "degree", 3, join(path, "rho"));
  n.rho.samples = int_or(rho, "samples", 400, join(path, "rho"));
  eff = {{"mode", "numeric"},
         {"boxes", {{"z_lower", to_json(n.z_box.lower)}, {"z_upper", to_json(n.z_box.upper)},
                    {"e_lower", n.e_lo}, {"e_upper", n.e_hi}}},
         {"lambda_bar_fraction", n.lambda_bar_fraction},
         {"verify_step", n.verify_step},
         {"k_request", n.gain.k_request},
         {"validation_range", n.gain.validation_range},
         {"validation_samples", n.gain.validation_samples},
         {"split", {{"margin", n.split.margin}, {"degree", n.split.degree}, {"grid_points", n.split.grid_points},
                    {"validation_samples", n.split.validation_samples}, {"seed", n.split.seed}}},
         {"rho", {{"degree", n.rho.degree}, {"samples", n.rho.samples}}}};
  return spec;
}

IntegratorConfig parse_integrator(const json& s, const std::string& path, const IntegratorConfig& def,
                                  json& eff) {
  if (!s.is_object()) throw ConfigError(path, "expected an object");
  IntegratorConfig ic;
  ic.t0 = number_or(s, "t0", def.t0, path);
  ic.t_end = number_or(s, "t_end", def.t_end, path);
  ic.dt = number_or(s, "dt", def.dt, path);
  ic.record_stride = int_or(s, "record_stride", def.record_stride, path);
  if (!(ic.dt > 0.0)) throw ConfigError(join(path, "dt"), "must be positive");
  if (!(ic.t_end > ic.t0)) throw ConfigError(join(path, "t_end"), "must exceed t0");
  if (ic.record_stride < 1) throw ConfigError(join(path, "record_stride"), "must be at least 1");
  eff = {{"t0", ic.t0}, {"t_end", ic.t_end}, {"dt", ic.dt}, {"record_stride", ic.record_stride}};
  return ic;
}

RegulationDemoConfig parse_regulation(const json& r, const TopologySet& topology, const SignalSpec& signal,
                                      json& eff) {
  const std::string path = "regulation";
  if (!r.is_object()) throw ConfigError(path, "expected an object");
  RegulationDemoConfig c;
  c.topology = topology;
  const json exo = r.value("exosystem", json{{"omega", 1.0}});
  const std::string ep = join(path, "exosystem");
  if (exo.contains("S")) {
    c.s = as_matrix(exo.at("S"), join(ep, "S"));
    if (c.s.rows() != c.s.cols()) throw ConfigError(join(ep, "S"), "must be square");
    eff["exosystem"] = {{"S", to_json(c.s)}};
  } else {
    const double w = number_or(exo, "omega", 1.0, ep);
    c.s = harmonic_exosystem(w);
    eff["exosystem"] = {{"omega", w}};
  }
  const auto nv = c.s.rows();
  if (r.contains("q")) {
    c.q = as_eigen(r.at("q"), join(path, "q")).transpose();
    if (c.q.size() != nv) throw ConfigError(join(path, "q"), "size must match S");
    eff["q"] = to_json(Eigen::VectorXd(c.q.transpose()));
  }
  const auto n = static_cast<std::size_t>(topology.followers());
  const auto& agents = require(r, "agents", path);
  if (!agents.is_array() || agents.size() != n)
    throw ConfigError(join(path, "agents"), "expected one {w, b} entry per follower (" + std::to_string(n) + ")");
  c.w.clear();
  c.b.clear();
  json alist = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const std::string ap = join(join(path, "agents"), i);
    c.w.push_back(number_or(agents[i], "w", 0.0, ap));
    c.b.push_back(number_or(agents[i], "b", 1.0, ap));
    if (c.b.back() == 0.0) throw ConfigError(join(ap, "b"), "must be nonzero");
    alist.push_back({{"w", c.w.back()}, {"b", c.b.back()}});
  }
  eff["agents"] = alist;
  c.v0 = r.contains("v0") ? as_eigen(r.at("v0"), join(path, "v0")) : Eigen::VectorXd::Unit(nv, 0);
  if (c.v0.size() != nv) throw ConfigError(join(path, "v0"), "size must match S");
  c.y0 = r.contains("y0") ? as_eigen(r.at("y0"), join(path, "y0")) : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (static_cast<std::size_t>(c.y0.size()) != n) throw ConfigError(join(path, "y0"), "expected one entry per follower");
  eff["v0"] = to_json(c.v0);
  eff["y0"] = to_json(c.y0);
  const json im = r.value("internal_model", json("default"));
  if (im.is_object()) {
    c.m = as_matrix(require(im, "M", join(path, "internal_model")), join(path, "internal_model.M"));
    c.n = as_eigen(require(im, "N", join(path, "internal_model")), join(path, "internal_model.N"));
    eff["internal_model"] = {{"M", to_json(*c.m)}, {"N", to_json(*c.n)}};
  } else if (im == "default") {
    eff["internal_model"] = "default";
  } else {
    throw ConfigError(join(path, "internal_model"), "expected \"default\" or {M, N}");
  }
  const json st = r.value("stabilizer", json{{"k", 5.0}, {"omega", {1.0, 0.1}}});
  const std::string sp = join(path, "stabilizer");
  const double k = as_number(require(st, "k", sp), join(sp, "k"));
  const Polynomial om = parse_polynomial(require(st, "omega", sp), join(sp, "omega"));
  try {
    c.stabilizer = SwitchedController::uniform(k, om, static_cast<int>(n));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(sp, e.what());
  }
  eff["stabilizer"] = {{"k", k}, {"omega", to_json(om)}};
  json sim_eff;
  c.integrator = parse_integrator(r.value("sim", json::object()), join(path, "sim"),
                                  IntegratorConfig{0.0, 60.0, 1e-3, 10}, sim_eff);
  eff["sim"] = sim_eff;
  c.settle_time = number_or(r, "settle_time", 50.0, path);
  c.tolerance = number_or(r, "tolerance", 1e-3, path);
  eff["settle_time"] = c.settle_time;
  eff["tolerance"] = c.tolerance;
  try {
    c.signal = signal.build(c.integrator.t_end);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("switching", e.what());
  }
  if (c.signal.max_value() > topology.size()) throw ConfigError("switching.values", "refers to a missing topology");
  return c;
}

}  // namespace

ExperimentConfig parse_config(const json& c) {
  if (!c.is_object()) throw ConfigError("", "configuration must be a JSON object");
  static const std::set<std::string> known{"topology", "switching", "agents", "initial_state", "controller",
                                           "sim", "lyapunov", "regulation", "output_dir", "seed"};
  for (const auto& [key, _] : c.items())
    if (!known.count(key)) throw ConfigError(key, "unknown field");

  json eff = json::object();
  TopologySet topology = parse_topology(require(c, "topology", ""), eff["topology"]);
  std::optional<AdtSpec> adt;
  const SignalSpec sspec = parse_switching(require(c, "switching", ""), eff["switching"], adt);
  std::vector<AgentDisturbance> dparts;
  std::vector<AgentModel> agents = parse_agents(require(c, "agents", ""), eff["agents"], dparts);
  if (static_cast<int>(agents.size()) != topology.followers())
    throw ConfigError("agents", "has " + std::to_string(agents.size()) + " entries but the topology has " +
                                    std::to_string(topology.followers()) + " followers");
  DisturbanceBox disturbance = stack_disturbance(dparts);
  Eigen::VectorXd x0 = parse_initial_state(require(c, "initial_state", ""), agents, eff["initial_state"]);
  ControllerSpec controller = parse_controller(require(c, "controller", ""), agents.size(), eff["controller"]);

  const json sim = c.value("sim", json::object());
  IntegratorConfig integrator = parse_integrator(sim, "sim", IntegratorConfig{0.0, 60.0, 1e-3, 10}, eff["sim"]);
  const double converge_after = number_or(sim, "converge_after", 40.0, "sim");
  const double converge_tol = number_or(sim, "converge_tol", 1e-2, "sim");
  eff["sim"]["converge_after"] = converge_after;
  eff["sim"]["converge_tol"] = converge_tol;

  SwitchingSignal signal = SwitchingSignal::constant(1);
  try {
    signal = sspec.build(integrator.t_end);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("switching", e.what());
  }
  if (signal.max_value() > topology.size())
    throw ConfigError("switching.values", "refers to topology " + std::to_string(signal.max_value()) +
                                              " but only " + std::to_string(topology.size()) + " are given");
  if (signal.t0() > integrator.t0) throw ConfigError("sim.t0", "precedes the switching signal's t0");

  const json ly = c.value("lyapunov", json::object());
  LyapunovSpec lyap;
  if (ly.contains("lambda0") && !ly.at("lambda0").is_null()) {
    lyap.lambda0 = as_number(ly.at("lambda0"), "lyapunov.lambda0");
    if (!(*lyap.lambda0 > 0.0)) throw ConfigError("lyapunov.lambda0", "must be positive");
  }
  lyap.mu0_samples = int_or(ly, "mu0_samples", 10000, "lyapunov");
  lyap.mu0_radius = number_or(ly, "mu0_radius", 5.0, "lyapunov");
  lyap.z_bound = number_or(ly, "z_bound", 3.0, "lyapunov");
  lyap.e_bound = number_or(ly, "e_bound", 2.0, "lyapunov");
  lyap.step = number_or(ly, "step", 0.1, "lyapunov");
  if (!(lyap.step > 0.0)) throw ConfigError("lyapunov.step", "must be positive");
  eff["lyapunov"] = {{"lambda0", optional_json(lyap.lambda0)}, {"mu0_samples", lyap.mu0_samples},
                     {"mu0_radius", lyap.mu0_radius},           {"z_bound", lyap.z_bound},
                     {"e_bound", lyap.e_bound},                 {"step", lyap.step}};

  std::optional<RegulationDemoConfig> regulation;
  if (c.contains("regulation") && !c.at("regulation").is_null())
    regulation = parse_regulation(c.at("regulation"), topology, sspec, eff["regulation"]);

  const json out = c.value("output_dir", json("out"));
  if (!out.is_string()) throw ConfigError("output_dir", "expected a string");
  eff["output_dir"] = out;
  const json seed = c.value("seed", json(1));
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    throw ConfigError("seed", "expected a nonnegative integer");
  eff["seed"] = seed.get<std::uint64_t>();

  return ExperimentConfig{eff,
                          std::move(topology),
                          std::move(signal),
                          adt,
                          std::move(agents),
                          std::move(disturbance),
                          std::move(x0),
                          std::move(controller),
                          integrator,
                          converge_after,
                          converge_tol,
                          lyap,
                          std::move(regulation),
                          out.get<std::string>(),
                          seed.get<std::uint64_t>()};
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t k = 0; k < end; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("", "JSON syntax error at line " + std::to_string(line) + ", column " +
                              std::to_string(col) + ": " + e.what());
  }
  return parse_config(j);
}

json benchmark_config_json() {
  const json lorenz = {{"model", "lorenz"},
                       {"params", {{"L_bar", {3.0, -3.2, 1.6}}, {"b", 1.0}, {"d_bound", 0.2}}},
                       {"d", {-0.2, 0.1, -0.2}}};
  return {{"topology",
           {{"h_matrices", {{{2, 0, -1}, {-1, 1, 0}, {-1, 0, 2}}, {{1, 0, 0}, {0, 2, -1}, {-1, -1, 2}}}}}},
          {"switching",
           {{"type", "periodic_two_phase"}, {"period", 6.0}, {"tau_d", 3.0}, {"N0", 1.0}, {"tau_d_threshold", 2.72}}},
          {"agents", {lorenz, lorenz, lorenz}},
          {"initial_state", {{"Z", {{2.6, -0.7}, {-2.8, 0.9}, {-1.4, 1.8}}}, {"e", {0.3, 0.2, -0.1}}}},
          {"controller", {{"mode", "manual"}, {"k", 12.0}, {"omega", {1.0, 0.0, 1.0}}}},
          {"sim", {{"t0", 0.0}, {"t_end", 60.0}, {"dt", 1e-3}, {"record_stride", 10}, {"converge_after", 40.0},
                   {"converge_tol", 1e-2}}},
          {"output_dir", "out/benchmark"},
          {"seed", 1}};
}

json regulation_demo_config_json() {
  json c = benchmark_config_json();
  c["regulation"] = {{"exosystem", {{"omega", 1.0}}},
                     {"agents", {{{"w", 0.5}, {"b", 1.0}}, {{"w", 0.5}, {"b", 1.0}}, {{"w", 0.5}, {"b", 1.0}}}},
                     {"v0", {1.0, 0.0}},
                     {"y0", {0.0, 0.0, 0.0}},
                     {"internal_model", "default"},
                     {"stabilizer", {{"k", 5.0}, {"omega", {1.0, 0.1}}}},
                     {"sim", {{"t0", 0.0}, {"t_end", 60.0}, {"dt", 1e-3}, {"record_stride", 10}}},
                     {"settle_time", 50.0},
                     {"tolerance", 1e-3}};
  c["output_dir"] = "out/regulation";
  return c;
}

std::string config_hash(const json& config) {
  const std::string body = config.dump();
  const std::string blob = "blob " + std::to_string(body.size()) + '\0' + body;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("SHA-1 digest failed");
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
  return os.str();
}

namespace {

TopologyValidation checked_topology(const ExperimentConfig& config) {
  const auto v = validate_topology_set(config.topology, kEigenTol, config.seed);
  if (!v.ok()) {
    std::string why = "topology not certified";
    for (const auto& d : v.diagnostics) {
      why += "; H_" + std::to_string(d.p);
      if (d.node >= 0) why += " node " + std::to_string(d.node);
      why += ": " + d.reason;
    }
    throw ValidationError(why);
  }
  return v;
}

double b_extreme(const std::vector<AgentModel>& agents, bool lower) {
  double v = lower ? std::numeric_limits<double>::infinity() : 0.0;
  for (const auto& a : agents) v = lower ? std::min(v, a.b_min()) : std::max(v, a.b_max());
  return v;
}

json adt_json(const ExperimentConfig& config, bool* valid) {
  if (!config.adt) {
    if (valid) *valid = true;
    return nullptr;
  }
  const auto r = validate_adt(config.signal, *config.adt, config.integrator.t_end);
  json j = to_json(r, *config.adt);
  const auto& sw = config.effective.at("switching");
  if (sw.contains("tau_d_threshold")) {
    const double thr = sw.at("tau_d_threshold").get<double>();
    j["tau_d_threshold"] = thr;
    j["threshold_source"] = "configured";
    j["exceeds_threshold"] = config.adt->tau_d > thr;
  }
  if (valid) *valid = r.valid;
  return j;
}

MultiLyapunovFamily lyapunov_family(const ClosedLoopSystem& sys, const std::vector<MMatrixCertificate>& certs,
                                    std::optional<double> lambda0) {
  MultiLyapunovFamily fam;
  fam.lambda0 = lambda0.value_or(0.0);
  std::vector<Polynomial> w_int;
  for (const auto& w : sys.controller().omega()) w_int.push_back(w.antiderivative());
  for (int p = 1; p <= sys.topology().size(); ++p) {
    const Eigen::MatrixXd h = sys.topology().matrix(p);
    const Eigen::VectorXd d = certs[static_cast<std::size_t>(p - 1)].d_diag;
    fam.members.push_back([&sys, h, d, w_int](const Eigen::VectorXd& x) {
      double u = 0.0;
      for (int i = 0; i < sys.followers(); ++i) {
        const auto& a = sys.agents()[static_cast<std::size_t>(i)];
        const Eigen::VectorXd z = sys.z_block(x, i);
        u += a.iss() ? a.iss()->value(z) : 0.5 * z.squaredNorm();
      }
      const Eigen::VectorXd ev = h * sys.e_block(x);
      for (int i = 0; i < sys.followers(); ++i)
        u += d(i) * sys.agents()[static_cast<std::size_t>(i)].b() * w_int[static_cast<std::size_t>(i)](ev(i) * ev(i));
      return u;
    });
  }
  return fam;
}

std::vector<Eigen::VectorXd> ball_samples(int dim, int count, double radius, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = gauss(rng);
    const double n = x.norm();
    if (n == 0.0) continue;
    x *= radius * std::pow(unit(rng), 1.0 / dim) / n;
    out.push_back(x);
  }
  return out;
}

}  // namespace

ClosedLoopSystem build_closed_loop(const ExperimentConfig& config, json* synthesis_report) {
  const auto topo = checked_topology(config);
  std::optional<SwitchedController> controller;
  if (config.controller.mode == "numeric") {
    NumericSynthesisResult res;
    try {
      res = synthesize_numeric(config.agents, config.topology, config.disturbance, config.controller.numeric);
    } catch (const FitError& e) {
      throw ValidationError(std::string("numeric synthesis failed: ") + e.what());
    } catch (const std::domain_error& e) {
      throw ValidationError(std::string("numeric synthesis failed: ") + e.what());
    }
    if (!res.gain.invariants_hold) throw ValidationError("numeric synthesis invariants do not hold");
    if (synthesis_report) *synthesis_report = to_json(res.gain);
    controller = res.gain.controller();
  } else {
    controller = SwitchedController(config.controller.k, config.controller.omega);
    if (synthesis_report) {
      const auto cc = coupling_constants(topo.certificates, config.topology.matrices(),
                                         b_extreme(config.agents, true), b_extreme(config.agents, false));
      *synthesis_report = to_json(manual_gain_report(*controller, cc, config.lyapunov.lambda0));
    }
  }
  try {
    return ClosedLoopSystem(config.agents, config.topology, *controller, config.signal, config.disturbance);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  json report;
  report["config_hash"] = config_hash(config.effective);
  report["seed"] = config.seed;
  report["effective_config"] = config.effective;

  const auto topo = checked_topology(config);
  report["topology"] = to_json(topo, config.topology);
  bool adt_ok = true;
  report["adt"] = adt_json(config, &adt_ok);
  if (!adt_ok) {
    std::ostringstream os;
    os << "switching signal violates average dwell time (tau_d = " << config.adt->tau_d
       << ", N0 = " << config.adt->n0 << ")";
    throw ValidationError(os.str());
  }
  json synth;
  const ClosedLoopSystem sys = build_closed_loop(config, &synth);
  report["controller"] = synth;
  const auto dverts = agent_disturbance_vertices(config.agents, config.disturbance);
  for (std::size_t i = 0; i < config.agents.size(); ++i) {
    if (config.agents[i].origin_residual(dverts[i]) > 1e-12)
      throw ValidationError("agent " + std::to_string(i + 1) + " does not vanish at the origin");
  }
  if (config.x0.size() != sys.state_dim()) throw ValidationError("initial state dimension mismatch");

  ExperimentResult out;
  out.trajectory = integrate(sys, config.x0, config.integrator);
  out.columns = closed_loop_columns(sys);
  out.csv = trajectory_csv(out.trajectory, out.columns);

  double tail = 0.0;
  std::size_t tail_samples = 0;
  for (std::size_t k = 0; k < out.trajectory.size(); ++k) {
    if (out.trajectory.times[k] < config.converge_after) continue;
    ++tail_samples;
    const auto& x = out.trajectory.states[k];
    for (int i = 0; i < sys.followers(); ++i)
      tail = std::max({tail, std::abs(x(sys.e_index(i))), sys.z_block(x, i).norm()});
  }
  out.converged = tail_samples > 0 && tail < config.converge_tol;
  report["convergence"] = {{"after", config.converge_after},
                           {"tolerance", config.converge_tol},
                           {"max_state_after", tail},
                           {"samples_after", tail_samples}};
  report["converged"] = out.converged;

  const auto fam = lyapunov_family(sys, topo.certificates, config.lyapunov.lambda0);
  const auto samples = ball_samples(sys.state_dim(), config.lyapunov.mu0_samples, config.lyapunov.mu0_radius, config.seed);
  json lj;
  if (!samples.empty()) {
    const auto mu0 = estimate_mu0(fam, samples);
    lj["mu0_estimate"] = {{"value", mu0.value}, {"p", mu0.p}, {"q", mu0.q}, {"samples", mu0.samples},
                          {"radius", config.lyapunov.mu0_radius}, {"kind", "estimate"}};
    if (config.lyapunov.lambda0) {
      const double need = min_dwell_time(mu0.value, *config.lyapunov.lambda0);
      lj["min_dwell_time"] = need;
      if (config.adt) lj["dwell_condition_holds"] = config.adt->tau_d > need;
    }
  }
  const auto mon = monitor_trajectory(out.trajectory, fam, config.signal);
  json jumps = json::array();
  for (const auto& j : mon.jumps) jumps.push_back({{"t", j.t}, {"from", j.p_before}, {"to", j.p_after}, {"ratio", j.ratio}});
  json intervals = json::array();
  for (const auto& iv : mon.intervals)
    intervals.push_back({{"t_start", iv.t_start}, {"t_end", iv.t_end}, {"p", iv.p}, {"u_start", iv.u_start},
                         {"u_end", iv.u_end}, {"max_log_rate", iv.max_log_rate}});
  lj["monitor"] = {{"decaying", mon.decaying}, {"flagged", mon.flagged}, {"max_jump_ratio", mon.max_jump_ratio},
                   {"summary", mon.summary}, {"jumps", jumps}, {"intervals", intervals}};
  report["lyapunov"] = lj;

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report["simulation"] = {{"method", "RK4"}, {"dt", config.integrator.dt}, {"t_end", config.integrator.t_end},
                          {"samples", out.trajectory.size()}, {"runtime_seconds", seconds},
                          {"columns", out.columns}};
  out.report = report;
  return out;
}

json verify_experiment(const ExperimentConfig& config, bool* all_hold) {
  json report;
  report["config_hash"] = config_hash(config.effective);
  report["seed"] = config.seed;
  bool ok = true;
  const auto topo = validate_topology_set(config.topology, kEigenTol, config.seed);
  report["topology"] = to_json(topo, config.topology);
  ok = ok && topo.ok();
  bool adt_ok = true;
  report["adt"] = adt_json(config, &adt_ok);
  ok = ok && adt_ok;

  json agents = json::array();
  const auto dverts = agent_disturbance_vertices(config.agents, config.disturbance);
  for (std::size_t i = 0; i < config.agents.size(); ++i) {
    const auto& a = config.agents[i];
    if (!a.iss()) {
      agents.push_back({{"agent", i + 1}, {"check", "none"}, {"reason", "no exp-ISS certificate"}});
      continue;
    }
    const auto& iss = *a.iss();
    SamplePlan plan;
    plan.state_lower = Eigen::VectorXd::Constant(a.nz(), -config.lyapunov.z_bound);
    plan.state_upper = Eigen::VectorXd::Constant(a.nz(), config.lyapunov.z_bound);
    plan.state_step = config.lyapunov.step;
    plan.input_lower = -config.lyapunov.e_bound;
    plan.input_upper = config.lyapunov.e_bound;
    plan.input_step = config.lyapunov.step;
    plan.disturbances = dverts[i];
    plan.seed = config.seed;
    const auto r = verify_supply_inequality(
        [&a](const Eigen::VectorXd& z, double e, const Eigen::VectorXd& d) { return a.f(z, e, d); }, iss.value,
        iss.gradient, iss.lambda, [&iss](double e) { return iss.supply(e); }, plan, 1e-9,
        "agent " + std::to_string(i + 1) + " exp-ISS");
    json j = to_json(r);
    j["agent"] = i + 1;
    j["lambda"] = iss.lambda;
    j["supply"] = to_json(iss.supply);
    agents.push_back(j);
    ok = ok && r.holds;
  }
  report["agents"] = agents;
  report["all_hold"] = ok;
  if (all_hold) *all_hold = ok;
  return report;
}

json synthesize_experiment(const ExperimentConfig& config) {
  const auto topo = checked_topology(config);
  json report;
  report["config_hash"] = config_hash(config.effective);
  report["seed"] = config.seed;
  if (config.controller.mode == "numeric") {
    NumericSynthesisResult res;
    try {
      res = synthesize_numeric(config.agents, config.topology, config.disturbance, config.controller.numeric);
    } catch (const FitError& e) {
      throw ValidationError(std::string("numeric synthesis failed: ") + e.what());
    } catch (const std::domain_error& e) {
      throw ValidationError(std::string("numeric synthesis failed: ") + e.what());
    }
    json agents = json::array();
    for (std::size_t i = 0; i < res.agents.size(); ++i) {
      const auto& s = res.agents[i];
      agents.push_back({{"agent", i + 1},
                        {"gamma_sq", to_json(s.split.gamma_sq)},
                        {"chi_sq", to_json(s.split.chi_sq)},
                        {"split_scale", s.split.scale},
                        {"split_min_validation_slack", s.split.min_validation_slack},
                        {"split_validation_samples", s.split.validation_samples},
                        {"rho_bar", to_json(s.rho_bar)},
                        {"pi_bar_sq", to_json(s.pi_bar_sq)},
                        {"lambda", s.lambda},
                        {"lambda_bar", s.lambda_bar},
                        {"c_bar", s.c_bar},
                        {"strong_iss", to_json(s.strong_iss)}});
    }
    report["agents"] = agents;
    report["gain"] = to_json(res.gain);
    report["invariants_hold"] = res.gain.invariants_hold;
  } else {
    const SwitchedController ctrl(config.controller.k, config.controller.omega);
    const auto cc = coupling_constants(topo.certificates, config.topology.matrices(), b_extreme(config.agents, true),
                                       b_extreme(config.agents, false));
    const auto r = manual_gain_report(ctrl, cc, config.lyapunov.lambda0);
    report["gain"] = to_json(r);
    report["invariants_hold"] = r.invariants_hold;
  }
  return report;
}

json run_regulation_experiment(const ExperimentConfig& config, std::string* csv) {
  if (!config.regulation) throw ConfigError("regulation", "missing required field");
  const auto& rc = *config.regulation;
  json report;
  report["config_hash"] = config_hash(config.effective);
  report["seed"] = config.seed;
  report["effective_config"] = config.effective;
  const auto spectrum = validate_exosystem(rc.s);
  json eig = json::array();
  for (const auto& l : spectrum.eigenvalues) eig.push_back({l.real(), l.imag()});
  report["exosystem"] = {{"valid", spectrum.valid}, {"eigenvalues", eig}, {"issues", spectrum.issues}};
  if (!spectrum.valid) throw ValidationError("exosystem is not neutrally stable with semi-simple spectrum");
  RegulationResult res;
  try {
    res = run_regulation_demo(rc);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  json models = json::array();
  for (const auto& m : res.models) {
    models.push_back({{"M", to_json(m.m)},
                      {"N", to_json(m.n)},
                      {"Phi", to_json(m.phi)},
                      {"Gamma", to_json(Eigen::VectorXd(m.gamma.transpose()))},
                      {"T", to_json(m.t)},
                      {"Psi", to_json(Eigen::VectorXd(m.psi.transpose()))},
                      {"sylvester_residual", m.sylvester_residual},
                      {"psi_residual", m.psi_residual},
                      {"condition_number", m.condition_number}});
  }
  report["internal_models"] = models;
  report["max_error_after_settle"] = res.max_error_after_settle;
  report["settle_time"] = rc.settle_time;
  report["tolerance"] = rc.tolerance;
  report["errors_at_end"] = res.errors_at_end;
  report["success"] = res.success;
  if (csv) *csv = trajectory_csv(res.trajectory, res.columns);
  return report;
}

void write_outputs(const std::string& dir, const std::string& csv, const json& report) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream f(fs::path(dir) / "trajectory.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / "trajectory.csv").string());
    f << csv;
  }
  std::ofstream f(fs::path(dir) / "report.json", std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / "report.json").string());
  f << report.dump(2) << "\n";
}

}  // namespace coopstab
