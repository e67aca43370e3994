#include "semirobin/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "semirobin/io.hpp"

namespace semirobin {

std::string to_string(DomainConfig::Kind kind) {
  return kind == DomainConfig::Kind::interval ? "interval" : "rectangle";
}

std::string to_string(PotentialConfig::Kind kind) {
  switch (kind) {
    case PotentialConfig::Kind::constant: return "constant";
    case PotentialConfig::Kind::nodal: return "nodal";
    case PotentialConfig::Kind::builtin: return "builtin";
  }
  return "?";
}

std::string to_string(BoundaryConfig::Kind kind) {
  switch (kind) {
    case BoundaryConfig::Kind::constant: return "constant";
    case BoundaryConfig::Kind::sides: return "sides";
    case BoundaryConfig::Kind::nodal: return "nodal";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Line of `section.key` in the raw text, 0 when absent.
int find_line(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line, current;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      current = trim(t.substr(1, t.size() - 2));
      if (key.empty() && current == section) return n;
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) continue;
    if (current == section && trim(t.substr(0, eq)) == key) return n;
  }
  return 0;
}

struct Cursor {
  const std::string& text;
  std::string section;
  std::string key;

  std::string name() const { return section.empty() ? key : section + "." + key; }
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(name() + ": " + what, find_line(text, section, key), name());
  }
};

double parse_real(const Cursor& c, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "pi") return std::numbers::pi;
  if (s == "-pi") return -std::numbers::pi;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || ptr != last) c.fail("expected a number, got '" + s + "'");
  if (!std::isfinite(v)) c.fail("must be finite");
  return v;
}

template <class Int>
Int parse_integer(const Cursor& c, const std::string& raw) {
  const std::string s = trim(raw);
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) c.fail("expected an integer, got '" + s + "'");
  return v;
}

std::vector<double> parse_list(const Cursor& c, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(c, item));
  if (out.empty()) c.fail("expected a comma-separated list");
  return out;
}

template <class E>
E parse_choice(const Cursor& c, const std::string& raw, std::initializer_list<std::pair<const char*, E>> choices) {
  const std::string s = trim(raw);
  std::string names;
  for (const auto& [name, value] : choices) {
    if (s == name) return value;
    names += names.empty() ? name : std::string(", ") + name;
  }
  c.fail("unknown value '" + s + "' (expected one of " + names + ")");
}

std::string format_list(const std::vector<double>& xs) {
  std::string out;
  for (double x : xs) out += (out.empty() ? "" : ", ") + format_number(x);
  return out;
}

using Parse = std::function<void(ProblemConfig&, const Cursor&, const std::string&)>;
using Write = std::function<std::optional<std::string>(const ProblemConfig&)>;

struct Field {
  const char* section;
  const char* key;
  Parse parse;
  Write write;
};

template <class T>
Field real_field(const char* section, const char* key, T ProblemConfig::*group, double T::*member) {
  return {section, key,
          [=](ProblemConfig& p, const Cursor& c, const std::string& s) { (p.*group).*member = parse_real(c, s); },
          [=](const ProblemConfig& p) -> std::optional<std::string> { return format_number((p.*group).*member); }};
}

template <class T>
Field int_field(const char* section, const char* key, T ProblemConfig::*group, int T::*member) {
  return {section, key,
          [=](ProblemConfig& p, const Cursor& c, const std::string& s) {
            (p.*group).*member = parse_integer<int>(c, s);
          },
          [=](const ProblemConfig& p) -> std::optional<std::string> { return std::to_string((p.*group).*member); }};
}

template <class T>
Field string_field(const char* section, const char* key, T ProblemConfig::*group, std::string T::*member) {
  return {section, key, [=](ProblemConfig& p, const Cursor&, const std::string& s) { (p.*group).*member = trim(s); },
          [=](const ProblemConfig& p) -> std::optional<std::string> {
            const std::string& v = (p.*group).*member;
            if (v.empty()) return std::nullopt;
            return v;
          }};
}

template <class T>
Field optional_field(const char* section, const char* key, T ProblemConfig::*group,
                     std::optional<double> T::*member) {
  return {section, key,
          [=](ProblemConfig& p, const Cursor& c, const std::string& s) { (p.*group).*member = parse_real(c, s); },
          [=](const ProblemConfig& p) -> std::optional<std::string> {
            const auto& v = (p.*group).*member;
            if (!v) return std::nullopt;
            return format_number(*v);
          }};
}

Field plan_real(const char* key, double SearchPlan::*member) {
  return {"solver", key,
          [=](ProblemConfig& p, const Cursor& c, const std::string& s) { p.solver.plan.*member = parse_real(c, s); },
          [=](const ProblemConfig& p) -> std::optional<std::string> { return format_number(p.solver.plan.*member); }};
}

Field plan_int(const char* key, int SearchPlan::*member) {
  return {"solver", key,
          [=](ProblemConfig& p, const Cursor& c, const std::string& s) {
            p.solver.plan.*member = parse_integer<int>(c, s);
          },
          [=](const ProblemConfig& p) -> std::optional<std::string> { return std::to_string(p.solver.plan.*member); }};
}

const std::vector<Field>& registry() {
  using D = DomainConfig;
  using P = PotentialConfig;
  using B = BoundaryConfig;
  using R = ReactionConfig;
  using S = SpectrumConfig;
  using PC = ProblemConfig;
  static const std::vector<Field> fields = {
      {"meta", "schema_version",
       [](PC& p, const Cursor& c, const std::string& s) { p.schema_version = parse_integer<int>(c, s); },
       [](const PC& p) -> std::optional<std::string> { return std::to_string(p.schema_version); }},

      {"domain", "kind",
       [](PC& p, const Cursor& c, const std::string& s) {
         p.domain.kind = parse_choice<D::Kind>(c, s, {{"interval", D::Kind::interval}, {"rectangle", D::Kind::rectangle}});
       },
       [](const PC& p) -> std::optional<std::string> { return to_string(p.domain.kind); }},
      real_field("domain", "a", &PC::domain, &D::a),
      real_field("domain", "b", &PC::domain, &D::b),
      int_field("domain", "n", &PC::domain, &D::n),
      real_field("domain", "lx", &PC::domain, &D::lx),
      real_field("domain", "ly", &PC::domain, &D::ly),
      int_field("domain", "nx", &PC::domain, &D::nx),
      int_field("domain", "ny", &PC::domain, &D::ny),

      {"potential", "kind",
       [](PC& p, const Cursor& c, const std::string& s) {
         p.potential.kind = parse_choice<P::Kind>(
             c, s, {{"constant", P::Kind::constant}, {"nodal", P::Kind::nodal}, {"builtin", P::Kind::builtin}});
       },
       [](const PC& p) -> std::optional<std::string> { return to_string(p.potential.kind); }},
      real_field("potential", "value", &PC::potential, &P::value),
      string_field("potential", "file", &PC::potential, &P::file),
      string_field("potential", "name", &PC::potential, &P::name),

      {"boundary", "kind",
       [](PC& p, const Cursor& c, const std::string& s) {
         p.boundary.kind =
             parse_choice<B::Kind>(c, s, {{"constant", B::Kind::constant}, {"sides", B::Kind::sides}, {"nodal", B::Kind::nodal}});
       },
       [](const PC& p) -> std::optional<std::string> { return to_string(p.boundary.kind); }},
      real_field("boundary", "value", &PC::boundary, &B::value),
      real_field("boundary", "left", &PC::boundary, &B::left),
      real_field("boundary", "right", &PC::boundary, &B::right),
      real_field("boundary", "bottom", &PC::boundary, &B::bottom),
      real_field("boundary", "top", &PC::boundary, &B::top),
      string_field("boundary", "file", &PC::boundary, &B::file),

      {"reaction", "kind",
       [](PC& p, const Cursor& c, const std::string& s) {
         p.reaction.kind = parse_choice<ReactionSpec::Kind>(c, s,
                                                            {{"model", ReactionSpec::Kind::model},
                                                             {"linear", ReactionSpec::Kind::linear},
                                                             {"square", ReactionSpec::Kind::square}});
       },
       [](const PC& p) -> std::optional<std::string> { return to_string(p.reaction.kind); }},
      int_field("reaction", "m", &PC::reaction, &R::m),
      int_field("reaction", "l", &PC::reaction, &R::l),
      real_field("reaction", "a_s_fraction", &PC::reaction, &R::a_s_fraction),
      optional_field("reaction", "a_s", &PC::reaction, &R::a_s),
      real_field("reaction", "delta", &PC::reaction, &R::delta),
      optional_field("reaction", "slope", &PC::reaction, &R::slope),

      plan_real("tol", &SearchPlan::tol),
      plan_real("tol_res", &SearchPlan::tol_res),
      plan_real("tol_sign", &SearchPlan::tol_sign),
      plan_real("d_min", &SearchPlan::d_min),
      {"solver", "seed",
       [](PC& p, const Cursor& c, const std::string& s) { p.solver.plan.seed = parse_integer<std::uint64_t>(c, s); },
       [](const PC& p) -> std::optional<std::string> { return std::to_string(p.solver.plan.seed); }},
      plan_real("rho", &SearchPlan::rho),
      plan_int("zero_starts", &SearchPlan::zero_starts),
      plan_int("w_starts", &SearchPlan::w_starts),
      plan_int("e_starts", &SearchPlan::e_starts),
      plan_int("random_starts", &SearchPlan::random_starts),
      plan_int("deflation_starts", &SearchPlan::deflation_starts),
      plan_real("deflation_shift", &SearchPlan::deflation_shift),
      plan_int("deflation_iters", &SearchPlan::deflation_iters),
      plan_int("mp_nodes", &SearchPlan::mp_nodes),
      plan_int("mp_iters", &SearchPlan::mp_iters),
      plan_int("max_iter", &SearchPlan::max_iter),
      plan_int("linking_samples", &SearchPlan::linking_samples),
      plan_int("max_halvings", &SearchPlan::max_halvings),
      plan_int("probe_directions", &SearchPlan::probe_directions),
      {"solver", "probe_radii",
       [](PC& p, const Cursor& c, const std::string& s) { p.solver.plan.probe_radii = parse_list(c, s); },
       [](const PC& p) -> std::optional<std::string> { return format_list(p.solver.plan.probe_radii); }},
      plan_int("concavity_samples", &SearchPlan::concavity_samples),
      {"solver", "tau_max_iter",
       [](PC& p, const Cursor& c, const std::string& s) { p.solver.tau.max_iter = parse_integer<int>(c, s); },
       [](const PC& p) -> std::optional<std::string> { return std::to_string(p.solver.tau.max_iter); }},
      {"solver", "tau_grad_tol",
       [](PC& p, const Cursor& c, const std::string& s) { p.solver.tau.grad_tol = parse_real(c, s); },
       [](const PC& p) -> std::optional<std::string> { return format_number(p.solver.tau.grad_tol); }},

      int_field("spectrum", "count", &PC::spectrum, &S::count),
      real_field("spectrum", "cluster_tol", &PC::spectrum, &S::cluster_tol),
      {"spectrum", "method",
       [](PC& p, const Cursor& c, const std::string& s) {
         p.spectrum.method = parse_choice<EigenMethod>(
             c, s, {{"auto", EigenMethod::automatic}, {"dense", EigenMethod::dense}, {"lanczos", EigenMethod::lanczos}});
       },
       [](const PC& p) -> std::optional<std::string> { return to_string(p.spectrum.method); }},
      int_field("spectrum", "dense_limit", &PC::spectrum, &S::dense_limit),
      real_field("spectrum", "residual_tol", &PC::spectrum, &S::residual_tol),

      string_field("output", "dir", &PC::output, &OutputConfig::dir),
      string_field("output", "prefix", &PC::output, &OutputConfig::prefix),
  };
  return fields;
}

void validate(const ProblemConfig& p, const std::string& text) {
  auto fail = [&](const std::string& section, const std::string& key, const std::string& what) {
    Cursor{text, section, key}.fail(what);
  };
  if (p.schema_version != kSchemaVersion)
    fail("meta", "schema_version", "unsupported schema version " + std::to_string(p.schema_version));

  const DomainConfig& d = p.domain;
  if (d.kind == DomainConfig::Kind::interval) {
    if (!(d.b > d.a)) fail("domain", "b", "interval needs b > a");
    if (d.n < 3) fail("domain", "n", "need at least 3 nodes");
  } else {
    if (!(d.lx > 0)) fail("domain", "lx", "must be positive");
    if (!(d.ly > 0)) fail("domain", "ly", "must be positive");
    if (d.nx < 2) fail("domain", "nx", "need at least 2 nodes per direction");
    if (d.ny < 2) fail("domain", "ny", "need at least 2 nodes per direction");
  }

  if (p.potential.kind == PotentialConfig::Kind::nodal && p.potential.file.empty())
    fail("potential", "file", "nodal potential needs a file");
  if (p.potential.kind == PotentialConfig::Kind::builtin && p.potential.name != "cosine")
    fail("potential", "name", "unknown built-in '" + p.potential.name + "' (expected cosine)");

  const BoundaryConfig& b = p.boundary;
  auto nonneg = [&](const char* key, double v) {
    if (v < 0) fail("boundary", key, "H(beta) requires a nonnegative boundary coefficient");
  };
  if (b.kind == BoundaryConfig::Kind::constant) nonneg("value", b.value);
  if (b.kind == BoundaryConfig::Kind::sides) {
    nonneg("left", b.left);
    nonneg("right", b.right);
    nonneg("bottom", b.bottom);
    nonneg("top", b.top);
  }
  if (b.kind == BoundaryConfig::Kind::nodal && b.file.empty()) fail("boundary", "file", "nodal boundary needs a file");

  const ReactionConfig& r = p.reaction;
  if (r.m < 1) fail("reaction", "m", "must be at least 1");
  if (r.l < r.m + 2) fail("reaction", "l", "H(f)(iv) requires l >= m + 2");
  if (!(r.delta > 0)) fail("reaction", "delta", "must be positive");
  if (!(r.a_s_fraction > 0 && r.a_s_fraction < 1)) fail("reaction", "a_s_fraction", "must lie in (0, 1)");
  if (r.a_s && !(*r.a_s > 0)) fail("reaction", "a_s", "must be positive");

  const SearchPlan& s = p.solver.plan;
  for (auto [key, v] : {std::pair{"tol", s.tol}, {"tol_res", s.tol_res}, {"tol_sign", s.tol_sign}, {"rho", s.rho},
                        {"deflation_shift", s.deflation_shift}})
    if (!(v > 0)) fail("solver", key, "must be positive");
  if (s.d_min < 0) fail("solver", "d_min", "must be nonnegative (0 selects the default)");
  for (auto [key, v] : {std::pair{"zero_starts", s.zero_starts}, {"w_starts", s.w_starts}, {"e_starts", s.e_starts},
                        {"random_starts", s.random_starts}, {"deflation_starts", s.deflation_starts},
                        {"max_halvings", s.max_halvings}})
    if (v < 0) fail("solver", key, "must be nonnegative");
  for (auto [key, v] : {std::pair{"mp_nodes", s.mp_nodes}, {"mp_iters", s.mp_iters}, {"max_iter", s.max_iter},
                        {"deflation_iters", s.deflation_iters},
                        {"linking_samples", s.linking_samples}, {"probe_directions", s.probe_directions},
                        {"concavity_samples", s.concavity_samples}})
    if (v < 1) fail("solver", key, "must be positive");
  if (s.mp_nodes < 3) fail("solver", "mp_nodes", "need at least 3 path nodes");
  for (double radius : s.probe_radii)
    if (!(radius > 0)) fail("solver", "probe_radii", "radii must be positive");
  if (p.solver.tau.max_iter < 1) fail("solver", "tau_max_iter", "must be positive");
  if (!(p.solver.tau.grad_tol > 0)) fail("solver", "tau_grad_tol", "must be positive");

  if (p.spectrum.count < 1) fail("spectrum", "count", "must be positive");
  if (!(p.spectrum.cluster_tol > 0)) fail("spectrum", "cluster_tol", "must be positive");
  if (p.spectrum.dense_limit < 1) fail("spectrum", "dense_limit", "must be positive");
  if (!(p.spectrum.residual_tol > 0)) fail("spectrum", "residual_tol", "must be positive");
  if (p.output.prefix.empty()) fail("output", "prefix", "must not be empty");
}

}  // namespace

ProblemConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.message(), static_cast<int>(e.line()));
  }

  std::set<std::string> known_sections;
  for (const Field& f : registry()) known_sections.insert(f.section);

  for (const auto& [section, body] : tree) {
    if (body.empty() && find_line(text, section, "") == 0)
      Cursor{text, "", section}.fail("unknown key (keys must live in a section)");
    if (!known_sections.count(section))
      throw ConfigError("unknown section [" + section + "]", find_line(text, section, ""), section);
    for (const auto& [key, value] : body) {
      bool found = false;
      for (const Field& f : registry()) found = found || (section == f.section && key == f.key);
      if (!found) Cursor{text, section, key}.fail("unknown key");
    }
  }
  for (const char* required : {"domain", "reaction"})
    if (tree.find(required) == tree.not_found() && find_line(text, required, "") == 0)
      throw ConfigError(std::string("missing required section [") + required + "]", 0, required);

  ProblemConfig config;
  for (const Field& f : registry()) {
    const auto section = tree.get_child_optional(pt::ptree::path_type(f.section, '\0'));
    if (!section) continue;
    const auto value = section->get_optional<std::string>(pt::ptree::path_type(f.key, '\0'));
    if (value) f.parse(config, Cursor{text, f.section, f.key}, *value);
  }
  validate(config, text);
  return config;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ProblemConfig& config) {
  std::ostringstream out;
  std::string current;
  for (const Field& f : registry()) {
    const auto value = f.write(config);
    if (!value) continue;
    if (current != f.section) {
      if (!current.empty()) out << '\n';
      out << '[' << f.section << "]\n";
      current = f.section;
    }
    out << f.key << " = " << *value << '\n';
  }
  return out.str();
}

Problem build_problem(const ProblemConfig& config, const std::filesystem::path& base_dir) {
  const DomainConfig& d = config.domain;
  Mesh mesh = d.kind == DomainConfig::Kind::interval ? build_interval_mesh(d.a, d.b, d.n)
                                                     : build_rectangle_mesh(d.lx, d.ly, d.nx, d.ny);
  auto nodal = [&](const std::string& file, const char* what) {
    std::vector<double> values = read_nodal_values(base_dir / file);
    if (static_cast<int>(values.size()) != mesh.node_count())
      throw ConfigError(std::string(what) + " file " + file + " has " + std::to_string(values.size()) +
                            " values for " + std::to_string(mesh.node_count()) + " nodes",
                        0, std::string(what) + ".file");
    return CoefficientField::nodal(std::move(values));
  };

  CoefficientField xi;
  switch (config.potential.kind) {
    case PotentialConfig::Kind::constant: xi = CoefficientField::constant(config.potential.value); break;
    case PotentialConfig::Kind::nodal: xi = nodal(config.potential.file, "potential"); break;
    case PotentialConfig::Kind::builtin: {
      const double amp = config.potential.value;
      const double x0 = d.kind == DomainConfig::Kind::interval ? d.a : 0.0;
      const double len = d.kind == DomainConfig::Kind::interval ? d.b - d.a : d.lx;
      xi = CoefficientField::callable(
          [=](const Point& z) { return amp * std::cos(2.0 * std::numbers::pi * (z.x - x0) / len); }, "cosine");
      break;
    }
  }

  CoefficientField beta;
  const BoundaryConfig& b = config.boundary;
  switch (b.kind) {
    case BoundaryConfig::Kind::constant: beta = CoefficientField::constant(b.value); break;
    case BoundaryConfig::Kind::sides: beta = CoefficientField::per_side(b.left, b.right, b.bottom, b.top); break;
    case BoundaryConfig::Kind::nodal: beta = nodal(b.file, "boundary"); break;
  }

  Problem problem;
  problem.disc = std::make_shared<const Discretization>(discretize(std::move(mesh), std::move(xi), std::move(beta)));
  problem.m = config.reaction.m;
  problem.l = config.reaction.l;
  problem.reaction.kind = config.reaction.kind;
  problem.reaction.softening_fraction = config.reaction.a_s_fraction;
  problem.reaction.softening = config.reaction.a_s;
  problem.reaction.band = config.reaction.delta;
  problem.reaction.slope = config.reaction.slope;
  problem.plan = config.solver.plan;
  problem.tau = config.solver.tau;
  problem.spectrum.cluster_tol = config.spectrum.cluster_tol;
  problem.spectrum.method = config.spectrum.method;
  problem.spectrum.dense_limit = config.spectrum.dense_limit;
  problem.spectrum.residual_tol = config.spectrum.residual_tol;
  problem.spectrum.seed = config.solver.plan.seed;
  return problem;
}

}  // namespace semirobin
