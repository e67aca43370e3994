#include <filesystem>
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "semirobin/cli.hpp"
#include "semirobin/config.hpp"
#include "semirobin/io.hpp"

namespace py = pybind11;
using namespace semirobin;

namespace {

Problem problem_from(const std::string& text, const std::string& base_dir) {
  return build_problem(parse_config(text), base_dir);
}

Eigen::MatrixXd node_matrix(const Mesh& mesh) {
  Eigen::MatrixXd out(mesh.node_count(), mesh.dim());
  for (int i = 0; i < mesh.node_count(); ++i) {
    out(i, 0) = mesh.node(i).x;
    if (mesh.dim() == 2) out(i, 1) = mesh.node(i).y;
  }
  return out;
}

SpectralLevels levels_for(const Problem& p, EigenDecomposition& d) {
  PencilOptions popt = p.spectrum;
  popt.method = EigenMethod::dense;
  d = solve_pencil(p.disc->gamma, p.disc->mass, p.disc->order(), popt);
  return {d.distinct_value(p.m), d.distinct_value(p.m + 1), d.distinct_value(p.l - 1), d.distinct_value(p.l)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Semilinear Robin problems: spectra, hypothesis audits and two-solution searches";

  py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("normalize_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
        py::arg("text"), "Parse INI text and return it with every default written out.");

  m.def("config_json", [](const std::string& text) { return to_json(parse_config(text)).dump(); }, py::arg("text"));

  m.def(
      "mesh_nodes",
      [](const std::string& text, const std::string& base_dir) {
        return node_matrix(problem_from(text, base_dir).disc->mesh);
      },
      py::arg("text"), py::arg("base_dir") = ".");

  m.def(
      "eigenvalues",
      [](const std::string& text, int count, const std::string& base_dir) {
        const Problem p = problem_from(text, base_dir);
        PencilOptions popt = p.spectrum;
        const int n = std::min(count, p.disc->order());
        const EigenDecomposition d = solve_pencil(p.disc->gamma, p.disc->mass, n, popt);
        return std::make_pair(Eigen::VectorXd(d.values), Eigen::VectorXd(d.residuals));
      },
      py::arg("text"), py::arg("count") = 10, py::arg("base_dir") = ".",
      "Smallest eigenvalues of the discrete Robin eigenproblem and their residuals.");

  m.def(
      "check_hypotheses",
      [](const std::string& text, const std::string& base_dir) {
        const Problem p = problem_from(text, base_dir);
        EigenDecomposition d;
        const SpectralLevels levels = levels_for(p, d);
        auto reaction = make_reaction(p.reaction, levels, p.m, p.l);
        return to_json(audit_hypotheses(*reaction, levels)).dump();
      },
      py::arg("text"), py::arg("base_dir") = ".");

  m.def(
      "solve",
      [](const std::string& text, const std::string& base_dir) {
        const ProblemConfig config = parse_config(text);
        SolutionSet s;
        {
          py::gil_scoped_release release;
          s = run_pipeline(build_problem(config, base_dir));
        }
        std::vector<Eigen::VectorXd> us;
        for (const SolutionRecord& r : s.records) us.push_back(r.u);
        return py::make_tuple(to_json(s, config).dump(), us, node_matrix(s.disc->mesh));
      },
      py::arg("text"), py::arg("base_dir") = ".",
      "Runs the full pipeline; returns (report JSON, solution vectors, node coordinates).");

  m.def(
      "verify",
      [](const std::string& text, const Eigen::VectorXd& u, double tol_res, const std::string& base_dir) {
        const ProblemConfig config = parse_config(text);
        const Problem p = build_problem(config, base_dir);
        EigenDecomposition d;
        auto reaction = make_reaction(p.reaction, levels_for(p, d), p.m, p.l);
        const double d_min = p.plan.d_min > 0 ? p.plan.d_min : default_d_min(p.disc->mesh);
        const EnergyContext ctx(p.disc, reaction);
        return to_json(verify_solution(ctx, u, tol_res > 0 ? tol_res : p.plan.tol_res, d_min)).dump();
      },
      py::arg("text"), py::arg("u"), py::arg("tol_res") = 0.0, py::arg("base_dir") = ".");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = dispatch(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a command-line subcommand; returns (exit code, stdout, stderr).");
}
