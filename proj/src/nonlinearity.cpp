#include "semirobin/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "semirobin/errors.hpp"

namespace semirobin {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// x (1 + x^2)^{-1/4} and its antiderivative (2/3)(1 + x^2)^{3/4}.
double soft(double x) { return x / std::pow(1.0 + x * x, 0.25); }
double soft_primitive(double x) { return (2.0 / 3.0) * std::pow(1.0 + x * x, 0.75); }
double soft_slope(double x) {
  const double s = 1.0 + x * x;
  return (1.0 + 0.5 * x * x) / std::pow(s, 1.25);
}

}  // namespace

ModelReaction::ModelReaction(const SpectralLevels& levels, int m, int l, double softening, double band)
    : levels_(levels), softening_(softening), band_(band) {
  joint_ = (levels.lambda_l1 - levels.lambda_m1) * band + softening * soft(band);
  band_energy_ = 0.5 * levels.lambda_l1 * band * band;
  params_.m = m;
  params_.l = l;
  params_.growth = std::max(std::abs(levels.lambda_l1), std::abs(levels.lambda_m1) + softening + joint_);
  params_.monotonicity_floor = std::min(levels.lambda_l1, levels.lambda_m1 - softening);
  params_.band = band;
  params_.band_upper = levels.lambda_l1;
}

double ModelReaction::value(const Point&, double x) const {
  if (std::abs(x) <= band_) return levels_.lambda_l1 * x;
  return levels_.lambda_m1 * x - softening_ * soft(x) + joint_ * sgn(x);
}

double ModelReaction::primitive(const Point&, double x) const {
  const double ax = std::abs(x);
  if (ax <= band_) return 0.5 * levels_.lambda_l1 * x * x;
  return band_energy_ + 0.5 * levels_.lambda_m1 * (ax * ax - band_ * band_) -
         softening_ * (soft_primitive(ax) - soft_primitive(band_)) + joint_ * (ax - band_);
}

double ModelReaction::slope(const Point&, double x) const {
  if (x >= -band_ && x < band_) return levels_.lambda_l1;
  return levels_.lambda_m1 - softening_ * soft_slope(x);
}

ModelReaction model_reaction(const SpectralLevels& lv, int m, int l, double softening, double band) {
  if (l < m + 2) throw HypothesisError("H(f)(iv)", "need l >= m + 2");
  if (!(lv.lambda_m < lv.lambda_m1))
    throw HypothesisError("H(f)(ii)", "need lambda_m < lambda_{m+1}");
  if (!(lv.lambda_m1 <= lv.lambda_l1))
    throw HypothesisError("H(f)(iv)", "need lambda_{m+1} <= lambda_{l-1}");
  if (!(lv.lambda_l1 < lv.lambda_l)) throw HypothesisError("H(f)(iv)", "need lambda_{l-1} < lambda_l");
  if (!(softening > 0.0 && softening < lv.lambda_m1 - lv.lambda_m))
    throw HypothesisError("H(f)(ii)", "softening amplitude must lie in (0, lambda_{m+1} - lambda_m)");
  if (!(band > 0.0) || !std::isfinite(band)) throw HypothesisError("H(f)(iv)", "band delta must be positive");
  return ModelReaction(lv, m, l, softening, band);
}

LinearReaction::LinearReaction(double slope, int m, int l, double band) : slope_(slope) {
  params_.m = m;
  params_.l = l;
  params_.growth = std::abs(slope);
  params_.monotonicity_floor = slope;
  params_.band = band;
  params_.band_upper = slope;
}

SquareReaction::SquareReaction(int m, int l) {
  params_.m = m;
  params_.l = l;
  params_.growth = 1.0;
  params_.monotonicity_floor = 0.0;
  params_.band = 1.0;
  params_.band_upper = 1.0;
}

CallableReaction::CallableReaction(Fn f, Fn primitive, Fn slope, ReactionParameters params, std::string name,
                                   bool autonomous)
    : f_(std::move(f)),
      primitive_(std::move(primitive)),
      slope_(std::move(slope)),
      params_(params),
      name_(std::move(name)),
      autonomous_(autonomous) {
  if (!f_ || !primitive_ || !slope_) throw InvalidArgument("callable reaction needs f, F and f_x");
}

std::string to_string(Clause clause) {
  switch (clause) {
    case Clause::preamble: return "(0) f(z,0) = 0";
    case Clause::growth: return "(i) linear growth";
    case Clause::monotonicity: return "(ii) monotonicity floor";
    case Clause::resonance: return "(iii) resonance at infinity";
    case Clause::near_zero: return "(iv) near-zero band";
  }
  return "?";
}

bool HypothesisReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const ClauseVerdict& v) { return v.pass; });
}

const ClauseVerdict& HypothesisReport::verdict(Clause clause) const {
  for (const auto& v : verdicts)
    if (v.clause == clause) return v;
  throw InvalidArgument("clause not audited: " + to_string(clause));
}

std::optional<Clause> HypothesisReport::first_failure() const {
  for (const auto& v : verdicts)
    if (!v.pass) return v.clause;
  return std::nullopt;
}

HypothesisReport audit_hypotheses(const Reaction& r, const SpectralLevels& lv, const SamplingGrid& grid) {
  const ReactionParameters& p = r.parameters();
  const double band = p.band > 0.0 ? p.band : 1.0;
  // The softening in f x - 2F only dominates once |x| >> 1, whatever the band.
  const double x_max = grid.x_max > 0.0 ? grid.x_max : std::max(1e3 * band, 1e4);
  constexpr double kEps = 2.220446049250313e-16;

  // Positive abscissae: a linear grid across the band, a logarithmic grid
  // from the band edge to x_max, and the three top decades.
  std::vector<double> pos;
  for (int k = 1; k <= grid.band_points; ++k) pos.push_back(band * k / grid.band_points);
  const double decades = std::log10(x_max / band);
  const int steps = std::max(1, static_cast<int>(std::ceil(decades * grid.per_decade)));
  for (int k = 1; k <= steps; ++k) pos.push_back(band * std::pow(10.0, decades * k / steps));
  const std::array<double, 3> top{x_max / 100.0, x_max / 10.0, x_max};
  pos.insert(pos.end(), top.begin(), top.end());
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  std::vector<double> xs;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) xs.push_back(-*it);
  xs.push_back(0.0);
  xs.insert(xs.end(), pos.begin(), pos.end());

  std::vector<Point> zs = grid.z_samples;
  if (zs.empty()) zs.push_back(Point{});

  HypothesisReport report;
  {
    std::ostringstream os;
    os << xs.size() << " abscissae in [-" << x_max << ", " << x_max << "], band " << band
       << ", pair spacing down to " << grid.min_spacing << ", " << zs.size() << " z sample(s)";
    report.grid = os.str();
  }
  if (!r.autonomous())
    report.caveats.push_back(
        "reaction depends on z: clauses are checked at finitely many z, uniformity in z is not certified");

  auto fail = [](ClauseVerdict& v, std::string detail, Witness w) {
    if (!v.pass) return;
    v.pass = false;
    v.detail = std::move(detail);
    v.witness = w;
  };

  ClauseVerdict pre{Clause::preamble, true, "f(z,0) = 0 at every z sample", std::nullopt};
  ClauseVerdict growth{Clause::growth, true, "", std::nullopt};
  ClauseVerdict mono{Clause::monotonicity, true, "", std::nullopt};
  ClauseVerdict reson{Clause::resonance, true, "", std::nullopt};
  ClauseVerdict zero{Clause::near_zero, true, "", std::nullopt};
  {
    std::ostringstream os;
    os << "|f| <= a (1 + |x|) with a = " << p.growth;
    growth.detail = os.str();
  }
  {
    std::ostringstream os;
    os << "difference quotients >= eta = " << p.monotonicity_floor << " (lambda_m = " << lv.lambda_m << ")";
    mono.detail = os.str();
  }
  {
    std::ostringstream os;
    os << "2F/x^2 <= lambda_{m+1} = " << lv.lambda_m1 << " and f x - 2F increasing and positive over the top decades";
    reson.detail = os.str();
  }
  {
    std::ostringstream os;
    os << "lambda_{l-1} x^2 <= f x <= theta x^2 on |x| <= " << band << " with theta = " << p.band_upper
       << " (lambda_{l-1} = " << lv.lambda_l1 << ", lambda_l = " << lv.lambda_l << ")";
    zero.detail = os.str();
  }

  const double eta = p.monotonicity_floor;
  if (eta < lv.lambda_m || !(eta > lv.lambda_m))
    fail(mono, "declared eta does not exceed lambda_m", Witness{zs.front(), 0.0, std::nullopt, eta, lv.lambda_m});
  if (p.band_upper > lv.lambda_l || !(p.band_upper < lv.lambda_l))
    fail(zero, "declared theta is not below lambda_l",
         Witness{zs.front(), 0.0, std::nullopt, p.band_upper, lv.lambda_l});
  if (!(p.band > 0.0)) fail(zero, "band delta must be positive", Witness{zs.front(), 0.0, std::nullopt, p.band, 0.0});

  for (const Point& z : zs) {
    const double f0 = r.value(z, 0.0);
    if (f0 != 0.0) fail(pre, "f(z,0) is nonzero", Witness{z, 0.0, std::nullopt, f0, 0.0});

    for (double x : xs) {
      const double f = r.value(z, x);
      const double bound = p.growth * (1.0 + std::abs(x));
      if (!(std::abs(f) <= bound * (1.0 + 1e-12)))
        fail(growth, "growth bound exceeded", Witness{z, x, std::nullopt, std::abs(f), bound});
    }

    auto check_pair = [&](double x, double y) {
      if (x == y) return;
      const double fx = r.value(z, x), fy = r.value(z, y);
      const double dq = (fx - fy) / (x - y);
      const double tol = 1e-12 + 8.0 * kEps * (std::abs(fx) + std::abs(fy)) / std::abs(x - y);
      if (!(dq >= eta - tol)) fail(mono, "difference quotient below eta", Witness{z, x, y, dq, eta});
    };
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) check_pair(xs[i], xs[i + 1]);
    for (double x : xs) {
      check_pair(x, x + grid.min_spacing);
      check_pair(x, -x);
    }

    for (double sign : {1.0, -1.0}) {
      double prev_gap = 0.0;
      for (std::size_t k = 0; k < top.size(); ++k) {
        const double x = sign * top[k];
        const double f = r.value(z, x), big_f = r.primitive(z, x);
        const double ratio = 2.0 * big_f / (x * x);
        if (!(ratio <= lv.lambda_m1 + 1e-9 * (1.0 + std::abs(lv.lambda_m1))))
          fail(reson, "2F/x^2 exceeds lambda_{m+1}", Witness{z, x, std::nullopt, ratio, lv.lambda_m1});
        const double gap = f * x - 2.0 * big_f;
        const double noise = 1e-9 * (std::abs(f * x) + std::abs(2.0 * big_f)) + 1e-12;
        if (!(gap > noise))
          fail(reson, "f x - 2F is not positive at a top decade", Witness{z, x, std::nullopt, gap, noise});
        if (k > 0 && !(gap - prev_gap > noise))
          fail(reson, "f x - 2F does not increase across the top decades",
               Witness{z, x, sign * top[k - 1], gap, prev_gap});
        prev_gap = gap;
      }
    }

    for (double x : xs) {
      if (std::abs(x) > p.band || x == 0.0) continue;
      const double fx = r.value(z, x) * x;
      const double lo = lv.lambda_l1 * x * x, hi = p.band_upper * x * x;
      const double tol = 1e-12 * (std::abs(lo) + std::abs(hi) + std::abs(fx)) + 1e-300;
      if (!(fx >= lo - tol)) fail(zero, "f x below lambda_{l-1} x^2 on the band", Witness{z, x, std::nullopt, fx, lo});
      if (!(fx <= hi + tol)) fail(zero, "f x above theta x^2 on the band", Witness{z, x, std::nullopt, fx, hi});
    }
  }
  report.verdicts = {pre, growth, mono, reson, zero};
  return report;
}

namespace {

template <typename Fn>
void for_each_interpolated(const Mesh& mesh, const Vector& u, Fn&& fn) {
  if (u.size() != mesh.node_count()) throw InvalidArgument("vector order does not match mesh");
  const int npc = mesh.nodes_per_cell();
  for (const auto& q : mesh.quadrature()) {
    const auto c = mesh.cell(q.cell);
    double uh = 0.0;
    for (int a = 0; a < npc; ++a) uh += q.shape[static_cast<std::size_t>(a)] * u[c[static_cast<std::size_t>(a)]];
    fn(q, c, uh);
  }
}

}  // namespace

Vector nemytskii_load(const Mesh& mesh, const Reaction& reaction, const Vector& u) {
  Vector load = Vector::Zero(mesh.node_count());
  const int npc = mesh.nodes_per_cell();
  for_each_interpolated(mesh, u, [&](const QuadPoint& q, std::span<const int> c, double uh) {
    const double w = q.weight * reaction.value(q.z, uh);
    for (int a = 0; a < npc; ++a) load[c[static_cast<std::size_t>(a)]] += w * q.shape[static_cast<std::size_t>(a)];
  });
  return load;
}

double nemytskii_energy(const Mesh& mesh, const Reaction& reaction, const Vector& u) {
  double e = 0.0;
  for_each_interpolated(mesh, u, [&](const QuadPoint& q, std::span<const int>, double uh) {
    e += q.weight * reaction.primitive(q.z, uh);
  });
  return e;
}

SymmetricForm nemytskii_jacobian(const Mesh& mesh, const Reaction& reaction, const Vector& u) {
  std::vector<Eigen::Triplet<double>> triplets;
  const int npc = mesh.nodes_per_cell();
  triplets.reserve(mesh.quadrature().size() * static_cast<std::size_t>(npc * (npc + 1) / 2));
  for_each_interpolated(mesh, u, [&](const QuadPoint& q, std::span<const int> c, double uh) {
    const double w = q.weight * reaction.slope(q.z, uh);
    for (int a = 0; a < npc; ++a)
      for (int b = a; b < npc; ++b) {
        int i = c[static_cast<std::size_t>(a)], j = c[static_cast<std::size_t>(b)];
        if (i > j) std::swap(i, j);
        triplets.emplace_back(i, j, w * q.shape[static_cast<std::size_t>(a)] * q.shape[static_cast<std::size_t>(b)]);
      }
  });
  return SymmetricForm::from_triplets(mesh.node_count(), triplets);
}

}  // namespace semirobin
