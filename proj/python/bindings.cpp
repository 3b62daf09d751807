#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "coopstab/controller.hpp"
#include "coopstab/dynamics.hpp"
#include "coopstab/error.hpp"
#include "coopstab/experiment.hpp"
#include "coopstab/graph_topology.hpp"
#include "coopstab/mmatrix.hpp"
#include "coopstab/switching.hpp"

namespace py = pybind11;
using namespace coopstab;

// JSON crosses the boundary as text; the Python package decodes it.
PYBIND11_MODULE(_core, m) {
  m.doc() = "Cooperative stabilization of multi-agent systems under switching topologies";

  py::register_exception<ValidationError>(m, "ValidationError");
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<BlowUpError>(m, "BlowUpError");

  m.def("build_h_matrix",
        [](const Eigen::MatrixXi& adjacency) { return build_h_matrix(LeaderDigraph(adjacency)); },
        py::arg("adjacency"));
  m.def("leader_reachable",
        [](const Eigen::MatrixXi& adjacency) { return leader_reachable(LeaderDigraph(adjacency)); },
        py::arg("adjacency"));

  m.def(
      "is_m_matrix",
      [](const Eigen::MatrixXd& h, double tol) {
        const auto c = is_m_matrix(h, tol);
        return py::dict(py::arg("is_m_matrix") = c.is_m_matrix, py::arg("eigenvalues") = c.eigenvalues,
                        py::arg("diagnostics") = c.diagnostics);
      },
      py::arg("h"), py::arg("tol") = kEigenTol);
  m.def(
      "diagonal_certificate",
      [](const Eigen::MatrixXd& h) {
        const auto c = synthesize_diagonal_certificate(h);
        return py::dict(py::arg("d_diag") = c.d_diag, py::arg("min_eig") = c.min_eig,
                        py::arg("method") = c.method);
      },
      py::arg("h"));

  m.def(
      "periodic_two_phase",
      [](double period, double t_end) {
        const auto s = periodic_two_phase(period, t_end);
        return py::make_tuple(s.switch_times(), s.values());
      },
      py::arg("period"), py::arg("t_end"));
  m.def(
      "validate_adt",
      [](double period, double tau_d, double n0, double horizon) {
        const auto r = validate_adt(periodic_two_phase(period, horizon), {tau_d, n0}, horizon);
        return py::dict(py::arg("valid") = r.valid, py::arg("worst_excess") = r.worst_excess,
                        py::arg("worst_count") = r.worst_count);
      },
      py::arg("period"), py::arg("tau_d"), py::arg("n0"), py::arg("horizon") = 60.0);
  m.def("min_dwell_time", &min_dwell_time, py::arg("mu0"), py::arg("lambda0"));

  m.def(
      "lorenz_rhs",
      [](const Eigen::Vector2d& z, double e, double u_bar, const Eigen::Vector3d& l_bar,
         const Eigen::Vector3d& d, double b) { return Eigen::Vector3d(lorenz_rhs(z, e, u_bar, l_bar, d, b)); },
      py::arg("z"), py::arg("e"), py::arg("u_bar"), py::arg("l_bar"), py::arg("d"), py::arg("b") = 1.0);
  m.def(
      "control",
      [](double k, const std::vector<double>& omega, const Eigen::VectorXd& ev) {
        return SwitchedController::uniform(k, Polynomial(omega), static_cast<int>(ev.size())).evaluate(ev);
      },
      py::arg("k"), py::arg("omega"), py::arg("ev"));

  m.def("benchmark_config", [] { return benchmark_config_json().dump(); });
  m.def("regulation_demo_config", [] { return regulation_demo_config_json().dump(); });
  m.def("config_hash", [](const std::string& text) { return config_hash(nlohmann::json::parse(text)); });
  m.def(
      "run_experiment",
      [](const std::string& text) {
        const auto cfg = parse_config_text(text);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
        }
        return py::make_tuple(r.report.dump(), r.csv);
      },
      py::arg("config"));
  m.def(
      "run_regulation",
      [](const std::string& text) {
        const auto cfg = parse_config_text(text);
        std::string csv;
        nlohmann::json report;
        {
          py::gil_scoped_release release;
          report = run_regulation_experiment(cfg, &csv);
        }
        return py::make_tuple(report.dump(), csv);
      },
      py::arg("config"));
}
