#include "semirobin/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "semirobin/config.hpp"
#include "semirobin/io.hpp"

namespace semirobin {

namespace {

namespace fs = std::filesystem;

struct Loaded {
  ProblemConfig config;
  Problem problem;
};

Loaded load(const std::string& path) {
  Loaded l;
  l.config = load_config(path);
  l.problem = build_problem(l.config, fs::path(path).parent_path());
  return l;
}

fs::path output_dir(const ProblemConfig& config, const std::string& override_dir) {
  return override_dir.empty() ? fs::path(config.output.dir) : fs::path(override_dir);
}

// Complete decomposition when the order allows it, else the configured count.
EigenDecomposition compute_spectrum(const Problem& p, int count) {
  const Discretization& disc = *p.disc;
  PencilOptions popt = p.spectrum;
  if (disc.order() <= popt.dense_limit) {
    popt.method = EigenMethod::dense;
    return solve_pencil(disc.gamma, disc.mass, disc.order(), popt);
  }
  return solve_pencil(disc.gamma, disc.mass, std::min(count, disc.order()), popt);
}

// Leading pairs of a decomposition, extended so no cluster is cut.
EigenDecomposition leading(const EigenDecomposition& d, int count) {
  int k = std::min(count, d.count());
  for (const Cluster& c : d.clusters)
    if (c.first < k && c.first + c.size > k) k = c.first + c.size;
  EigenDecomposition out;
  out.cluster_tol = d.cluster_tol;
  out.values = d.values.head(k);
  out.residuals = d.residuals.head(k);
  out.vectors = d.vectors.leftCols(k);
  for (const Cluster& c : d.clusters)
    if (c.first < k) out.clusters.push_back(c);
  return out;
}

SpectralLevels levels_of(const EigenDecomposition& d, int m, int l) {
  if (d.cluster_count() < l)
    throw InvalidArgument("only " + std::to_string(d.cluster_count()) + " distinct eigenvalues computed, need " +
                          std::to_string(l));
  return {d.distinct_value(m), d.distinct_value(m + 1), d.distinct_value(l - 1), d.distinct_value(l)};
}

int run_spectrum(const std::string& path, const std::string& out_dir, bool dump, std::ostream& out) {
  const Loaded in = load(path);
  const Discretization& disc = *in.problem.disc;
  const EigenDecomposition full = compute_spectrum(in.problem, in.config.spectrum.count);
  const EigenDecomposition head = leading(full, in.config.spectrum.count);
  const fs::path dir = output_dir(in.config, out_dir);
  const std::string prefix = in.config.output.prefix;

  write_spectrum_csv(dir / (prefix + "_spectrum.csv"), head);

  Json j;
  j["config"] = to_json(in.config);
  j["spectrum"] = to_json(head);
  j["first_eigen"] = to_json(first_eigen_report(full));
  j["coercivity"] = to_json(coercivity_shift(disc.gamma, disc.mass, disc.h1, in.problem.spectrum));
  const int m = in.config.reaction.m;
  Json gaps = Json::array();
  if (full.cluster_count() > m) {
    const double mid = 0.5 * (full.distinct_value(m) + full.distinct_value(m + 1));
    try {
      gaps.push_back(to_json(gap_certificate(GapSide::lower, disc, full, m, CoefficientField::constant(mid))));
    } catch (const CertificateError& e) {
      gaps.push_back({{"side", "lower"}, {"error", e.what()}});
    }
  }
  if (full.complete()) {
    const double below = full.distinct_value(m) - 1.0;
    try {
      gaps.push_back(to_json(gap_certificate(GapSide::upper, disc, full, m, CoefficientField::constant(below))));
    } catch (const CertificateError& e) {
      gaps.push_back({{"side", "upper"}, {"error", e.what()}});
    }
  }
  j["gap_certificates"] = std::move(gaps);
  write_json(dir / (prefix + "_certificates.json"), j);

  if (dump) {
    write_form_csv(dir / (prefix + "_mass.csv"), disc.mass);
    write_form_csv(dir / (prefix + "_stiffness.csv"), disc.stiffness);
    write_form_csv(dir / (prefix + "_potential.csv"), disc.potential);
    write_form_csv(dir / (prefix + "_boundary.csv"), disc.boundary);
    write_form_csv(dir / (prefix + "_gamma.csv"), disc.gamma);
    write_json(dir / (prefix + "_mesh.json"), mesh_to_json(disc.mesh));
  }

  for (int k = 0; k < head.count(); ++k) out << k + 1 << ' ' << format_number(head.values[k]) << '\n';
  return kExitOk;
}

int run_check_f(const std::string& path, double x_max, const std::string& json_path, std::ostream& out) {
  const Loaded in = load(path);
  const int m = in.config.reaction.m, l = in.config.reaction.l;
  const EigenDecomposition d = compute_spectrum(in.problem, std::max(in.config.spectrum.count, l + 2));
  const SpectralLevels levels = levels_of(d, m, l);
  std::shared_ptr<const Reaction> reaction;
  try {
    reaction = make_reaction(in.problem.reaction, levels, m, l);
  } catch (const HypothesisError& e) {
    out << "reaction rejected: " << e.what() << '\n';
    return kExitVerdict;
  }
  SamplingGrid grid;
  grid.x_max = x_max;
  if (!reaction->autonomous())
    for (const QuadPoint& q : in.problem.disc->mesh.quadrature()) grid.z_samples.push_back(q.z);
  const HypothesisReport report = audit_hypotheses(*reaction, levels, grid);
  out << "reaction: " << reaction->name() << "  m=" << m << " l=" << l << '\n';
  out << format_hypothesis_table(report);
  if (!json_path.empty()) {
    Json j;
    j["config"] = to_json(in.config);
    j["levels"] = to_json(levels);
    j["hypotheses"] = to_json(report);
    write_json(json_path, j);
  }
  return report.all_pass() ? kExitOk : kExitVerdict;
}

int run_solve(const std::string& path, const std::string& out_dir, std::ostream& out) {
  const Loaded in = load(path);
  const SolutionSet s = run_pipeline(in.problem);
  const fs::path dir = output_dir(in.config, out_dir);
  const std::string prefix = in.config.output.prefix;
  write_json(dir / (prefix + "_report.json"), to_json(s, in.config));
  for (std::size_t i = 0; i < s.records.size(); ++i)
    write_solution_csv(dir / (prefix + "_solution_" + std::to_string(i) + ".csv"), s.disc->mesh, s.records[i].u);

  int verified = 0;
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const SolutionRecord& r = s.records[i];
    const bool pass = i < s.verifications.size() && s.verifications[i].pass;
    verified += pass ? 1 : 0;
    out << "solution " << i << ": " << (pass ? "PASS" : "FAIL") << "  energy=" << format_number(r.energy)
        << " residual=" << format_number(r.residual) << " l2=" << format_number(r.l2_norm)
        << " via " << to_string(r.provenance) << '\n';
  }
  if (!s.success) out << "failed at " << s.failed_stage << ": " << s.failure << '\n';
  out << "report: " << (dir / (prefix + "_report.json")).string() << '\n';
  return s.success && verified == 2 ? kExitOk : kExitVerdict;
}

int run_verify(const std::string& path, const std::string& solution, double tol_res, std::ostream& out) {
  const Loaded in = load(path);
  const int m = in.config.reaction.m, l = in.config.reaction.l;
  const EigenDecomposition d = compute_spectrum(in.problem, std::max(in.config.spectrum.count, l + 2));
  auto reaction = make_reaction(in.problem.reaction, levels_of(d, m, l), m, l);
  const Vector u = read_solution_csv(solution, in.problem.disc->mesh);
  const SearchPlan& plan = in.config.solver.plan;
  const double d_min = plan.d_min > 0 ? plan.d_min : default_d_min(in.problem.disc->mesh);
  const EnergyContext ctx(in.problem.disc, reaction);
  const VerificationReport r = verify_solution(ctx, u, tol_res > 0 ? tol_res : plan.tol_res, d_min);
  out << to_json(r).dump(2) << '\n';
  out << (r.pass ? "PASS" : "FAIL") << '\n';
  return r.pass ? kExitOk : kExitVerdict;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two nontrivial solutions of semilinear Robin problems", "semirobin"};
  app.require_subcommand(1);

  std::string config, out_dir, json_path, solution;
  bool dump = false;
  double x_max = 0.0, tol_res = 0.0;

  auto* spectrum = app.add_subcommand("spectrum", "Eigenvalue table and spectral certificates");
  spectrum->add_option("config", config, "Configuration file")->required();
  spectrum->add_option("-o,--out", out_dir, "Output directory (default: [output] dir)");
  spectrum->add_flag("--dump-forms", dump, "Also write the assembled forms and the mesh");

  auto* check = app.add_subcommand("check-f", "Audit the reaction against its structural hypotheses");
  check->add_option("config", config, "Configuration file")->required();
  check->add_option("--x-max", x_max, "Largest sampled |x| (0: default)");
  check->add_option("--json", json_path, "Write the audit as JSON");

  auto* solve = app.add_subcommand("solve", "Search for two nontrivial solutions");
  solve->add_option("config", config, "Configuration file")->required();
  solve->add_option("-o,--out", out_dir, "Output directory (default: [output] dir)");

  auto* verify = app.add_subcommand("verify", "Check a solution CSV against the weak form");
  verify->add_option("config", config, "Configuration file")->required();
  verify->add_option("solution", solution, "Solution CSV")->required();
  verify->add_option("--tol-res", tol_res, "Residual tolerance (0: from config)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*spectrum) return run_spectrum(config, out_dir, dump, out);
    if (*check) return run_check_f(config, x_max, json_path, out);
    if (*solve) return run_solve(config, out_dir, out);
    if (*verify) return run_verify(config, solution, tol_res, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitVerdict;
  }
  return kExitUsage;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace semirobin
