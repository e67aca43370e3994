#include "semirobin/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "semirobin/errors.hpp"

namespace semirobin {

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

// Rows of numbers; a non-numeric first row is skipped as a header.
std::vector<std::vector<double>> read_numeric_rows(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    bool numeric = true;
    for (const std::string& cell : split_commas(line)) {
      double v = 0.0;
      if (!parse_double(cell, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && lineno == 1) continue;
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": non-numeric row");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<double> read_nodal_values(const std::filesystem::path& path) {
  std::vector<double> out;
  for (const auto& row : read_numeric_rows(path)) out.push_back(row.back());
  return out;
}

void write_form_csv(const std::filesystem::path& path, const SymmetricForm& form) {
  std::ofstream out = open_out(path);
  out << "row,col,value\n";
  const SparseMatrix& a = form.matrix();
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
      out << it.row() << ',' << it.col() << ',' << format_number(it.value()) << '\n';
}

SymmetricForm read_form_csv(const std::filesystem::path& path, int order) {
  std::vector<Eigen::Triplet<double>> t;
  for (const auto& row : read_numeric_rows(path)) {
    if (row.size() != 3) throw InvalidArgument(path.string() + ": expected row,col,value");
    const int i = static_cast<int>(row[0]), j = static_cast<int>(row[1]);
    if (i < 0 || j < 0 || i >= order || j >= order) throw InvalidArgument(path.string() + ": index out of range");
    if (i <= j) t.emplace_back(i, j, row[2]);
  }
  return SymmetricForm::from_triplets(order, t);
}

Json mesh_to_json(const Mesh& mesh) {
  Json j;
  j["dim"] = mesh.dim();
  const Domain& d = mesh.domain();
  if (d.kind == Domain::Kind::interval)
    j["domain"] = {{"kind", "interval"}, {"a", d.a}, {"b", d.b}};
  else
    j["domain"] = {{"kind", "rectangle"}, {"lx", d.lx}, {"ly", d.ly}};
  Json nodes = Json::array();
  for (const Point& p : mesh.nodes())
    nodes.push_back(mesh.dim() == 1 ? Json::array({p.x}) : Json::array({p.x, p.y}));
  j["nodes"] = std::move(nodes);
  Json cells = Json::array();
  for (int e = 0; e < mesh.cell_count(); ++e) {
    Json c = Json::array();
    for (int i : mesh.cell(e)) c.push_back(i);
    cells.push_back(std::move(c));
  }
  j["elements"] = std::move(cells);
  Json facets = Json::array();
  for (const BoundaryFacet& f : mesh.boundary_facets()) {
    Json n = Json::array();
    for (int k = 0; k < f.node_count; ++k) n.push_back(f.nodes[static_cast<std::size_t>(k)]);
    facets.push_back({{"nodes", n}, {"weight", f.weight}, {"side", to_string(f.side)}});
  }
  j["boundary_facets"] = std::move(facets);
  return j;
}

Mesh mesh_from_json(const Json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    Domain d;
    const Json& dj = j.at("domain");
    if (dj.at("kind").get<std::string>() == "interval") {
      d.kind = Domain::Kind::interval;
      d.a = dj.at("a").get<double>();
      d.b = dj.at("b").get<double>();
    } else {
      d.kind = Domain::Kind::rectangle;
      d.lx = dj.at("lx").get<double>();
      d.ly = dj.at("ly").get<double>();
    }
    std::vector<Point> nodes;
    for (const Json& p : j.at("nodes")) nodes.push_back(Point{p.at(0).get<double>(), dim == 2 ? p.at(1).get<double>() : 0.0});
    std::vector<int> conn;
    for (const Json& c : j.at("elements"))
      for (const Json& i : c) conn.push_back(i.get<int>());
    std::vector<BoundaryFacet> facets;
    for (const Json& f : j.at("boundary_facets")) {
      BoundaryFacet b;
      const Json& n = f.at("nodes");
      b.node_count = static_cast<int>(n.size());
      for (int k = 0; k < b.node_count && k < 2; ++k) b.nodes[static_cast<std::size_t>(k)] = n.at(static_cast<std::size_t>(k)).get<int>();
      b.weight = f.at("weight").get<double>();
      b.side = side_from_string(f.at("side").get<std::string>());
      facets.push_back(b);
    }
    return Mesh(dim, d, std::move(nodes), std::move(conn), std::move(facets));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed mesh descriptor: ") + e.what());
  }
}

void write_spectrum_csv(const std::filesystem::path& path, const EigenDecomposition& decomp) {
  std::ofstream out = open_out(path);
  out << "k,lambda,multiplicity,residual\n";
  for (const Cluster& c : decomp.clusters)
    for (int i = c.first; i < c.first + c.size; ++i)
      out << i + 1 << ',' << format_number(decomp.values[i]) << ',' << c.size << ','
          << format_number(decomp.residuals[i]) << '\n';
}

void write_solution_csv(const std::filesystem::path& path, const Mesh& mesh, const Vector& u) {
  if (u.size() != mesh.node_count()) throw InvalidArgument("solution order does not match mesh");
  std::ofstream out = open_out(path);
  out << (mesh.dim() == 1 ? "node,x,u\n" : "node,x,y,u\n");
  for (int i = 0; i < mesh.node_count(); ++i) {
    out << i << ',' << format_number(mesh.node(i).x) << ',';
    if (mesh.dim() == 2) out << format_number(mesh.node(i).y) << ',';
    out << format_number(u[i]) << '\n';
  }
}

Vector read_solution_csv(const std::filesystem::path& path, const Mesh& mesh) {
  const auto rows = read_numeric_rows(path);
  const std::size_t cols = mesh.dim() == 1 ? 3 : 4;
  if (rows.size() != static_cast<std::size_t>(mesh.node_count()))
    throw InvalidArgument(path.string() + ": " + std::to_string(rows.size()) + " rows for " +
                          std::to_string(mesh.node_count()) + " nodes");
  Vector u(mesh.node_count());
  for (const auto& row : rows) {
    if (row.size() != cols) throw InvalidArgument(path.string() + ": expected " + std::to_string(cols) + " columns");
    const int i = static_cast<int>(row[0]);
    if (i < 0 || i >= mesh.node_count()) throw InvalidArgument(path.string() + ": node index out of range");
    u[i] = row.back();
  }
  return u;
}

namespace {

Json vector_json(const std::vector<double>& v) { return Json(v); }

Json witness_json(const Witness& w) {
  Json j = {{"z", {w.z.x, w.z.y}}, {"x", w.x}};
  if (w.x2) j["x_prime"] = *w.x2;
  j["observed"] = w.observed;
  j["bound"] = w.bound;
  return j;
}

}  // namespace

Json to_json(const ProblemConfig& c) {
  Json j;
  j["schema_version"] = c.schema_version;
  j["domain"] = {{"kind", to_string(c.domain.kind)}, {"a", c.domain.a},   {"b", c.domain.b},
                 {"n", c.domain.n},                  {"lx", c.domain.lx}, {"ly", c.domain.ly},
                 {"nx", c.domain.nx},                {"ny", c.domain.ny}};
  j["potential"] = {{"kind", to_string(c.potential.kind)},
                    {"value", c.potential.value},
                    {"file", c.potential.file},
                    {"name", c.potential.name}};
  j["boundary"] = {{"kind", to_string(c.boundary.kind)}, {"value", c.boundary.value}, {"left", c.boundary.left},
                   {"right", c.boundary.right},          {"bottom", c.boundary.bottom}, {"top", c.boundary.top},
                   {"file", c.boundary.file}};
  Json r = {{"kind", to_string(c.reaction.kind)},
            {"m", c.reaction.m},
            {"l", c.reaction.l},
            {"a_s_fraction", c.reaction.a_s_fraction},
            {"delta", c.reaction.delta}};
  if (c.reaction.a_s) r["a_s"] = *c.reaction.a_s;
  if (c.reaction.slope) r["slope"] = *c.reaction.slope;
  j["reaction"] = std::move(r);
  const SearchPlan& p = c.solver.plan;
  j["solver"] = {{"tol", p.tol},
                 {"tol_res", p.tol_res},
                 {"tol_sign", p.tol_sign},
                 {"d_min", p.d_min},
                 {"seed", p.seed},
                 {"rho", p.rho},
                 {"zero_starts", p.zero_starts},
                 {"w_starts", p.w_starts},
                 {"e_starts", p.e_starts},
                 {"random_starts", p.random_starts},
                 {"deflation_starts", p.deflation_starts},
                 {"deflation_shift", p.deflation_shift},
                 {"deflation_iters", p.deflation_iters},
                 {"mp_nodes", p.mp_nodes},
                 {"mp_iters", p.mp_iters},
                 {"max_iter", p.max_iter},
                 {"linking_samples", p.linking_samples},
                 {"max_halvings", p.max_halvings},
                 {"probe_directions", p.probe_directions},
                 {"probe_radii", p.probe_radii},
                 {"concavity_samples", p.concavity_samples},
                 {"tau_max_iter", c.solver.tau.max_iter},
                 {"tau_grad_tol", c.solver.tau.grad_tol}};
  j["spectrum"] = {{"count", c.spectrum.count},
                   {"cluster_tol", c.spectrum.cluster_tol},
                   {"method", to_string(c.spectrum.method)},
                   {"dense_limit", c.spectrum.dense_limit},
                   {"residual_tol", c.spectrum.residual_tol}};
  j["output"] = {{"dir", c.output.dir}, {"prefix", c.output.prefix}};
  return j;
}

Json to_json(const EigenDecomposition& d, bool with_vectors) {
  Json j;
  j["order"] = d.order();
  j["count"] = d.count();
  j["cluster_tol"] = d.cluster_tol;
  j["eigenvalues"] = vector_json(std::vector<double>(d.values.data(), d.values.data() + d.values.size()));
  j["residuals"] = vector_json(std::vector<double>(d.residuals.data(), d.residuals.data() + d.residuals.size()));
  Json clusters = Json::array();
  for (std::size_t k = 0; k < d.clusters.size(); ++k) {
    const Cluster& c = d.clusters[k];
    clusters.push_back({{"index", k + 1}, {"value", c.value}, {"multiplicity", c.size}, {"max_residual", c.max_residual}});
  }
  j["clusters"] = std::move(clusters);
  if (with_vectors) {
    Json vecs = Json::array();
    for (int c = 0; c < d.count(); ++c)
      vecs.push_back(std::vector<double>(d.vectors.col(c).data(), d.vectors.col(c).data() + d.order()));
    j["vectors"] = std::move(vecs);
  }
  return j;
}

Json to_json(const FirstEigenReport& r) {
  return {{"simple", r.simple},         {"fixed_sign", r.fixed_sign}, {"higher_nodal", r.higher_nodal},
          {"non_nodal", r.non_nodal}, {"ok", r.ok},                 {"failure", r.failure}};
}

Json to_json(const CoercivityCertificate& c) { return {{"lambda1", c.lambda1}, {"mu", c.mu}, {"c0", c.c0}}; }

Json to_json(const GapCertificate& c) {
  return {{"side", to_string(c.side)},   {"index", c.index},         {"eta", c.eta_label},
          {"eta_min", c.eta_min},        {"eta_max", c.eta_max},     {"eigenvalue", c.eigenvalue},
          {"constant", c.constant},      {"block_dimension", c.block_dimension}};
}

Json to_json(const HypothesisReport& r) {
  Json j;
  j["all_pass"] = r.all_pass();
  j["grid"] = r.grid;
  j["caveats"] = r.caveats;
  Json v = Json::array();
  for (const ClauseVerdict& c : r.verdicts) {
    Json e = {{"clause", to_string(c.clause)}, {"pass", c.pass}, {"detail", c.detail}};
    if (c.witness) e["witness"] = witness_json(*c.witness);
    v.push_back(std::move(e));
  }
  j["clauses"] = std::move(v);
  return j;
}

Json to_json(const SpectralLevels& l) {
  return {{"lambda_m", l.lambda_m}, {"lambda_m1", l.lambda_m1}, {"lambda_l1", l.lambda_l1}, {"lambda_l", l.lambda_l}};
}

Json to_json(const ConcavitySample& s) {
  return {{"samples", s.samples}, {"violations", s.violations}, {"worst_margin", s.worst_margin}, {"slack", s.slack}};
}

Json to_json(const LinkingReport& r) {
  Json rounds = Json::array();
  for (const LinkingRound& x : r.rounds)
    rounds.push_back({{"rho", x.rho},
                      {"w_ok", x.w_ok},
                      {"e_ok", x.e_ok},
                      {"w_max", x.w_max},
                      {"e_min", x.e_min},
                      {"w_grad_max", x.w_grad_max}});
  return {{"samples", r.samples},       {"rho", r.rho},         {"w_fraction", r.w_fraction},
          {"e_fraction", r.e_fraction}, {"satisfied", r.satisfied}, {"w_flat", r.w_flat},
          {"rounds", std::move(rounds)}};
}

Json to_json(const CoercivityReport& r) {
  Json rays = Json::array();
  for (const RayProbe& p : r.rays) rays.push_back({{"values", p.values}, {"tail_increasing", p.tail_increasing}});
  return {{"radii", r.radii}, {"tol_sign", r.tol_sign}, {"flagged", r.flagged()}, {"rays", std::move(rays)}};
}

Json to_json(const SolutionRecord& s) {
  return {{"energy", s.energy},
          {"reduced_grad_norm", s.reduced_grad_norm},
          {"residual", s.residual},
          {"l2_norm", s.l2_norm},
          {"max_abs", s.u.size() ? s.u.cwiseAbs().maxCoeff() : 0.0},
          {"provenance", to_string(s.provenance)},
          {"start_index", s.start_index},
          {"start_label", s.start_label}};
}

Json to_json(const VerificationReport& r) {
  Json ends = Json::array();
  for (const EndpointCheck& c : r.endpoint_checks)
    ends.push_back({{"side", to_string(c.side)},
                    {"normal_derivative", c.normal_derivative},
                    {"expected", c.expected},
                    {"tolerance", c.tolerance},
                    {"pass", c.pass}});
  return {{"residual", r.residual},     {"l2_norm", r.l2_norm},   {"energy", r.energy},
          {"gradient_norm", r.gradient_norm}, {"tol_res", r.tol_res}, {"d_min", r.d_min},
          {"nontrivial", r.nontrivial}, {"pass", r.pass},         {"robin_endpoint_checks", std::move(ends)}};
}

Json to_json(const RoundtripReport& r) {
  return {{"full_gradient_norm", r.full_gradient_norm}, {"reprojection_error", r.reprojection_error}, {"pass", r.pass}};
}

Json to_json(const Attempt& a) {
  return {{"strategy", a.strategy}, {"start_index", a.start_index}, {"start_label", a.start_label},
          {"converged", a.converged}, {"accepted", a.accepted},     {"energy", a.energy},
          {"grad_norm", a.grad_norm}, {"distance", a.distance},     {"l2_norm", a.l2_norm}, {"iterations", a.iterations},
          {"note", a.note}};
}

Json to_json(const SolutionSet& s, const ProblemConfig& config) {
  Json j;
  j["success"] = s.success;
  if (!s.success) j["failure"] = {{"stage", s.failed_stage}, {"message", s.failure}};
  j["config"] = to_json(config);
  if (s.disc) j["mesh"] = {{"dim", s.disc->mesh.dim()}, {"nodes", s.disc->order()}, {"cells", s.disc->mesh.cell_count()}};
  if (s.reaction) {
    const ReactionParameters& p = s.reaction->parameters();
    j["reaction"] = {{"name", s.reaction->name()},
                     {"m", p.m},
                     {"l", p.l},
                     {"growth", p.growth},
                     {"monotonicity_floor", p.monotonicity_floor},
                     {"band", p.band},
                     {"band_upper", p.band_upper}};
    if (auto* model = dynamic_cast<const ModelReaction*>(s.reaction.get())) {
      j["reaction"]["softening"] = model->softening();
      j["reaction"]["joint"] = model->joint();
    }
  }
  if (s.spectrum.count() > 0) {
    Json sp = to_json(s.spectrum);
    // The full table goes to CSV; keep the report readable.
    const int keep = std::min(s.spectrum.count(), 20);
    sp["eigenvalues"] = std::vector<double>(s.spectrum.values.data(), s.spectrum.values.data() + keep);
    sp["residuals"] = std::vector<double>(s.spectrum.residuals.data(), s.spectrum.residuals.data() + keep);
    Json cl = Json::array();
    for (std::size_t k = 0; k < sp["clusters"].size() && k < 20; ++k) cl.push_back(sp["clusters"][k]);
    sp["clusters"] = std::move(cl);
    sp["max_residual"] = s.spectrum.residuals.size() ? s.spectrum.residuals.maxCoeff() : 0.0;
    j["spectrum"] = std::move(sp);
  }
  if (s.first_eigen) j["first_eigen"] = to_json(*s.first_eigen);
  if (s.levels) {
    j["split"] = to_json(*s.levels);
    j["split"]["m"] = config.reaction.m;
    j["split"]["l"] = config.reaction.l;
  }
  if (s.hypotheses) j["hypotheses"] = to_json(*s.hypotheses);
  Json cert;
  if (s.coercivity) cert["coercivity"] = to_json(*s.coercivity);
  if (s.concave_gap) cert["concave_gap"] = to_json(*s.concave_gap);
  if (s.tail_gap) cert["tail_gap"] = to_json(*s.tail_gap);
  if (s.concavity) cert["concavity_sampling"] = to_json(*s.concavity);
  if (!cert.empty()) j["certificates"] = std::move(cert);
  if (s.linking) j["linking"] = to_json(*s.linking);
  if (s.coercivity_probe) j["coercivity_probe"] = to_json(*s.coercivity_probe);
  j["d_min"] = s.d_min;
  j["flat_branch"] = s.flat_branch;
  Json recs = Json::array();
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    Json r = to_json(s.records[i]);
    if (i < s.verifications.size()) r["verification"] = to_json(s.verifications[i]);
    if (i < s.roundtrips.size()) r["roundtrip"] = to_json(s.roundtrips[i]);
    recs.push_back(std::move(r));
  }
  j["solutions"] = std::move(recs);
  j["separation"] = s.separation;
  Json att = Json::array();
  for (const Attempt& a : s.attempts) att.push_back(to_json(a));
  j["attempts"] = std::move(att);
  return j;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string format_hypothesis_table(const HypothesisReport& r) {
  std::ostringstream os;
  os << "grid: " << r.grid << '\n';
  for (const ClauseVerdict& c : r.verdicts) {
    char head[64];
    std::snprintf(head, sizeof head, "%-30s %s", to_string(c.clause).c_str(), c.pass ? "PASS" : "FAIL");
    os << head << "  " << c.detail;
    if (c.witness) {
      os << "\n    witness: z=(" << c.witness->z.x << ", " << c.witness->z.y << ") x=" << format_number(c.witness->x);
      if (c.witness->x2) os << " x'=" << format_number(*c.witness->x2);
      os << " observed=" << format_number(c.witness->observed) << " bound=" << format_number(c.witness->bound);
    }
    os << '\n';
  }
  for (const std::string& cav : r.caveats) os << "caveat: " << cav << '\n';
  return os.str();
}

}  // namespace semirobin
