#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ipfasst/analysis.hpp"
#include "ipfasst/config.hpp"
#include "ipfasst/error.hpp"
#include "ipfasst/experiments.hpp"

namespace py = pybind11;
using namespace ipfasst;

namespace {

py::object to_python(const Cell& c) {
  if (std::holds_alternative<long long>(c)) return py::int_(std::get<long long>(c));
  if (std::holds_alternative<double>(c)) return py::float_(std::get<double>(c));
  if (std::holds_alternative<std::string>(c)) return py::str(std::get<std::string>(c));
  return py::none();
}

ExperimentConfig resolve(const std::string& experiment, const std::vector<std::string>& overrides,
                         const std::string& config_path) {
  return load_config(config_path, overrides, experiment);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Inexact spectral deferred corrections and PFASST for the heat equation";

  // translators run newest first, so the base goes in first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<NonConvergence>(m, "NonConvergence", PyExc_RuntimeError);

  m.def(
      "quadrature",
      [](int substeps) {
        const QuadratureTable t = build_q(substeps);
        return py::make_tuple(t.nodes.points(), t.q, t.q_delta);
      },
      py::arg("substeps"), "Uniform nodes, integration matrix Q and backward-Euler matrix Q_delta.");

  m.def(
      "iteration_matrix", [](int substeps, double z) { return iteration_matrix(build_q(substeps), z); },
      py::arg("substeps"), py::arg("z"));

  m.def(
      "damping_factor", [](int substeps, double z) { return damping_factor(build_q(substeps), z); },
      py::arg("substeps"), py::arg("z"), "Spectral radius of the sweep for y' = lambda y, z = lambda*dt.");

  m.def(
      "damping_scan",
      [](int substeps, int points) {
        std::vector<double> z, rho;
        for (const auto& s : damping_scan(build_q(substeps), default_damping_grid(points))) {
          z.push_back(s.z);
          rho.push_back(s.rho);
        }
        return py::make_tuple(z, rho);
      },
      py::arg("substeps"), py::arg("points") = 200);

  m.def("experiment_names", &experiment_names);

  m.def(
      "resolve_config",
      [](const std::string& experiment, const std::vector<std::string>& overrides, const std::string& config) {
        py::dict out;
        for (const auto& [k, v] : config_entries(resolve(experiment, overrides, config))) out[py::str(k)] = v;
        return out;
      },
      py::arg("experiment"), py::arg("overrides") = std::vector<std::string>{}, py::arg("config") = "",
      "Resolved key/value settings, as strings.");

  m.def(
      "run_experiment",
      [](const std::string& experiment, const std::vector<std::string>& overrides, const std::string& config) {
        const ExperimentConfig cfg = resolve(experiment, overrides, config);
        Table t;
        {
          py::gil_scoped_release release;
          t = run_experiment(cfg);
        }
        py::list rows;
        for (const auto& row : t.rows) {
          py::list r;
          for (const auto& c : row) r.append(to_python(c));
          rows.append(r);
        }
        std::ostringstream csv;
        write_csv(csv, t, cfg);
        return py::make_tuple(t.columns, rows, csv.str());
      },
      py::arg("experiment"), py::arg("overrides") = std::vector<std::string>{}, py::arg("config") = "",
      "Runs one experiment; returns (columns, rows, csv_text).");
}
