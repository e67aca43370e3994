#include "semirobin/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace semirobin {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::minimizer: return "minimizer";
    case Provenance::linking: return "linking";
    case Provenance::mountain_pass: return "mountain-pass";
    case Provenance::deflation: return "deflation";
  }
  return "minimizer";
}

std::string to_string(ReactionSpec::Kind kind) {
  switch (kind) {
    case ReactionSpec::Kind::model: return "model";
    case ReactionSpec::Kind::linear: return "linear";
    case ReactionSpec::Kind::square: return "square";
    case ReactionSpec::Kind::custom: return "custom";
  }
  return "model";
}

double default_d_min(const Mesh& mesh) { return 1e-3 * std::sqrt(mesh.domain().measure()); }

namespace {

std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> factor(const SymmetricForm& form, const char* name) {
  auto ldlt = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(form.matrix());
  if (ldlt->info() != Eigen::Success) throw ConvergenceError(std::string("factorization of ") + name + " failed", 0.0);
  return ldlt;
}

double dual_norm(const Eigen::SimplicialLDLT<SparseMatrix>& ldlt, const Vector& r) {
  const Vector x = ldlt.solve(r);
  return std::sqrt(std::max(0.0, r.dot(x)));
}

}  // namespace

SolverContext::SolverContext(std::shared_ptr<const ReductionContext> reduction, SearchPlan plan)
    : reduction_(std::move(reduction)), plan_(std::move(plan)) {
  if (!reduction_) throw InvalidArgument("solver needs a reduction context");
  if (!(plan_.rho > 0.0)) throw InvalidArgument("linking radius rho must be positive");
  if (plan_.d_min < 0.0) throw InvalidArgument("d_min must be positive");
  if (plan_.d_min == 0.0) plan_.d_min = default_d_min(energy().mesh());
  const double lambda1 = reduction_->split().eigenvalues()[0];
  shift_ = std::max(0.0, -lambda1) + 1.0;
  mass_ldlt_ = factor(energy().mass(), "M");
  h1_ldlt_ = factor(energy().h1(), "A");
}

double SolverContext::mass_norm(const Vector& u) const { return std::sqrt(std::max(0.0, energy().mass().quadratic(u))); }
double SolverContext::mass_dual_norm(const Vector& r) const { return dual_norm(*mass_ldlt_, r); }
double SolverContext::h1_dual_norm(const Vector& r) const { return dual_norm(*h1_ldlt_, r); }

SolutionRecord SolverContext::make_record(const Vector& v, const Vector& y, Provenance provenance, int start_index,
                                          std::string label) const {
  SolutionRecord rec;
  rec.v = v;
  rec.y = y;
  rec.u = reduction_->assemble(v, y);
  rec.energy = phi(energy(), rec.u);
  const ReducedValue ev = evaluate_reduced(*reduction_, v, y);
  rec.reduced_grad_norm = reduction_->reduced_dual_norm(ev.gradient);
  rec.residual = mass_dual_norm(grad_phi(energy(), rec.u));
  rec.l2_norm = mass_norm(rec.u);
  rec.provenance = provenance;
  rec.start_index = start_index;
  rec.start_label = std::move(label);
  return rec;
}

namespace {

// Reduced functional as an Objective; tau is warm-started from the previous
// evaluation, which keeps a search sequence deterministic.
Objective reduced_objective(const ReductionContext& ctx) {
  auto warm = std::make_shared<std::optional<Vector>>();
  return [&ctx, warm](const Vector& v) {
    const ReducedValue ev = evaluate_reduced(ctx, v, *warm);
    *warm = ev.tau.y;
    return Evaluation{ev.value, ev.gradient};
  };
}

Metric reduced_metric(const SolverContext& sc) {
  const ReductionContext* ctx = &sc.reduction();
  const Vector diag = (ctx->reduced_eigenvalues().array() + sc.shift()).matrix();
  Metric m;
  m.precondition = [diag](const Vector& g) { return Vector(g.cwiseQuotient(diag)); };
  m.dual_norm = [ctx](const Vector& g) { return ctx->reduced_dual_norm(g); };
  return m;
}

struct Polished {
  Vector v, y;
  double grad_norm = 0.0;
  double residual = 0.0;
  bool converged = false;
};

// Newton steps on the full system G u - load(u) = 0, mapped back to reduced
// coordinates. The reduced part of a full Newton step equals the Newton step
// of the reduced functional, so this refines v while tau stays exact.
Polished polish(const SolverContext& sc, Vector v, std::optional<Vector> warm) {
  const ReductionContext& ctx = sc.reduction();
  const SearchPlan& plan = sc.plan();
  const auto& split = ctx.split();
  const int d = ctx.concave_dimension();
  ReducedValue ev = evaluate_reduced(ctx, v, warm);
  Polished p;
  for (int step = 0; step < 12; ++step) {
    const Vector u = ctx.assemble(v, ev.tau.y);
    const Vector g = grad_phi(sc.energy(), u);
    p.grad_norm = ctx.reduced_dual_norm(ev.gradient);
    p.residual = sc.mass_dual_norm(g);
    if (p.grad_norm <= plan.tol && p.residual <= plan.tol_res) break;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(hessian(sc.energy(), u).matrix());
    if (ldlt.info() != Eigen::Success) break;
    const Vector delta = ldlt.solve(-g);
    if (!delta.allFinite()) break;
    const Vector c = split.coordinates(delta);
    const Vector v2 = v + c.tail(ctx.reduced_dimension());
    const Vector y2 = ev.tau.y + c.head(d);
    ReducedValue ev2;
    try {
      ev2 = evaluate_reduced(ctx, v2, y2);
    } catch (const TauError&) {
      break;
    }
    if (!(ctx.reduced_dual_norm(ev2.gradient) < p.grad_norm)) break;
    v = v2;
    ev = std::move(ev2);
  }
  p.v = std::move(v);
  p.y = ev.tau.y;
  const Vector u = ctx.assemble(p.v, p.y);
  p.grad_norm = ctx.reduced_dual_norm(ev.gradient);
  p.residual = sc.mass_dual_norm(grad_phi(sc.energy(), u));
  p.converged = p.grad_norm <= plan.tol && p.residual <= plan.tol_res;
  return p;
}

DescentOptions descent_options(const SearchPlan& plan) {
  DescentOptions o;
  o.max_iter = plan.max_iter;
  o.grad_tol = plan.tol;
  return o;
}

// Smooth random function of the reduced block: normal coefficients damped
// by the eigenvalue, scaled to H1 norm `radius`.
Vector smooth_random(const SolverContext& sc, Rng& rng, double radius) {
  const ReductionContext& ctx = sc.reduction();
  const Vector& lam = ctx.reduced_eigenvalues();
  Vector v = rng.normal_vector(lam.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] /= (lam[k] + sc.shift());
  return radius * v / ctx.reduced_norm(v);
}

double full_distance(const SolutionRecord& a, const SolutionRecord& b) {
  // Eigen-coordinates are M-orthonormal, so the M-distance is Euclidean.
  return std::sqrt((a.v - b.v).squaredNorm() + (a.y - b.y).squaredNorm());
}

// a is preferred over b: lower energy, then nontrivial, then provenance,
// then start index.
bool preferred(const SolutionRecord& a, const SolutionRecord& b, double tol_sign, double d_min) {
  if (std::abs(a.energy - b.energy) > tol_sign) return a.energy < b.energy;
  const bool na = a.l2_norm >= d_min, nb = b.l2_norm >= d_min;
  if (na != nb) return na;
  if (a.provenance != b.provenance) return a.provenance < b.provenance;
  return a.start_index < b.start_index;
}

}  // namespace

SolutionRecord descend_from(const SolverContext& sc, const Vector& v0, Provenance provenance, int start_index,
                            std::string label, bool* converged) {
  const ReductionContext& ctx = sc.reduction();
  const DescentResult dr = descend(reduced_objective(ctx), v0, descent_options(sc.plan()), reduced_metric(sc));
  const Polished p = polish(sc, dr.x, std::nullopt);
  if (converged) *converged = p.converged;
  return sc.make_record(p.v, p.y, provenance, start_index, std::move(label));
}

LinkingReport linking_sign_check(const ReductionContext& ctx, double rho, int samples, std::uint64_t seed,
                                 double tol_sign, double grad_tol, int max_halvings) {
  if (!(rho > 0.0)) throw InvalidArgument("linking radius must be positive");
  LinkingReport report;
  report.samples = samples;
  report.rho = rho;
  if (samples <= 0) return report;
  Rng rng(seed);
  double r = rho;
  int best = -1;
  double best_score = -1.0;
  for (int h = 0; h <= max_halvings; ++h, r *= 0.5) {
    LinkingRound round;
    round.rho = r;
    round.w_max = -std::numeric_limits<double>::infinity();
    round.e_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
      const Vector w = r * (1.0 - rng.uniform()) * ctx.random_direction(Block::linking, rng);
      const ReducedValue ev = evaluate_reduced(ctx, w);
      round.w_max = std::max(round.w_max, ev.value);
      round.w_grad_max = std::max(round.w_grad_max, ctx.reduced_dual_norm(ev.gradient));
      if (ev.value <= tol_sign) ++round.w_ok;
      const Vector e = r * (1.0 - rng.uniform()) * ctx.random_direction(Block::tail, rng);
      const double ve = tau(ctx, e).energy;
      round.e_min = std::min(round.e_min, ve);
      if (ve >= -tol_sign) ++round.e_ok;
    }
    report.rounds.push_back(round);
    const double score = std::min(round.w_ok, round.e_ok) / static_cast<double>(samples);
    if (score > best_score) {
      best_score = score;
      best = h;
    }
    if (round.w_ok == samples && round.e_ok == samples) break;
  }
  const LinkingRound& chosen = report.rounds[static_cast<std::size_t>(best)];
  report.rho = chosen.rho;
  report.w_fraction = chosen.w_ok / static_cast<double>(samples);
  report.e_fraction = chosen.e_ok / static_cast<double>(samples);
  report.satisfied = chosen.w_ok == samples && chosen.e_ok == samples;
  report.w_flat = report.satisfied && std::abs(chosen.w_max) <= tol_sign && chosen.w_grad_max <= grad_tol;
  return report;
}

SolutionRecord minimize_reduced(const SolverContext& sc, std::vector<Attempt>* log) {
  const ReductionContext& ctx = sc.reduction();
  const SearchPlan& plan = sc.plan();
  Rng rng(plan.seed + 1);

  struct Start {
    Vector v;
    std::string label;
  };
  std::vector<Start> starts;
  for (int i = 0; i < plan.zero_starts; ++i)
    starts.push_back({1e-3 * plan.rho * ctx.random_direction(Block::reduced, rng), "zero-perturbation"});
  for (int i = 0; i < plan.w_starts; ++i)
    starts.push_back({plan.rho * ctx.random_direction(Block::linking, rng), "linking-sphere"});
  for (int i = 0; i < plan.e_starts; ++i)
    starts.push_back({plan.rho * ctx.random_direction(Block::tail, rng), "tail-sphere"});
  for (int i = 0; i < plan.random_starts; ++i)
    starts.push_back({smooth_random(sc, rng, plan.rho * (1.0 + 4.0 * rng.uniform())), "random"});

  std::optional<SolutionRecord> best;
  double best_grad = std::numeric_limits<double>::infinity();
  Vector best_any;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    Attempt a;
    a.strategy = "minimize";
    a.start_index = static_cast<int>(i);
    a.start_label = starts[i].label;
    try {
      bool ok = false;
      SolutionRecord rec = descend_from(sc, starts[i].v, Provenance::minimizer, static_cast<int>(i), starts[i].label, &ok);
      a.converged = ok;
      a.energy = rec.energy;
      a.grad_norm = rec.reduced_grad_norm;
      a.l2_norm = rec.l2_norm;
      if (rec.reduced_grad_norm < best_grad) {
        best_grad = rec.reduced_grad_norm;
        best_any = rec.v;
      }
      if (ok && (!best || preferred(rec, *best, plan.tol_sign, sc.d_min()))) best = std::move(rec);
    } catch (const ConvergenceError& e) {
      a.note = e.what();
    }
    if (log) log->push_back(std::move(a));
  }
  if (!best) {
    std::ostringstream os;
    os << "no start converged; best reduced gradient norm " << best_grad;
    throw TauError(os.str(), best_grad, best_any);
  }
  for (std::size_t i = 0; log && i < log->size(); ++i) {
    Attempt& a = (*log)[log->size() - starts.size() + i];
    a.accepted = a.start_index == best->start_index;
  }
  return *best;
}

std::vector<SolutionRecord> flat_ball_points(const SolverContext& sc, double rho) {
  const ReductionContext& ctx = sc.reduction();
  const auto& split = ctx.split();
  const int off = split.offset_in(Block::linking, Block::reduced);
  const int width = split.dimension(Block::linking);
  std::vector<SolutionRecord> out;
  int index = 0;
  for (int j = 0; j < width; ++j) {
    Vector dir = Vector::Zero(ctx.reduced_dimension());
    dir[off + j] = 1.0;
    dir /= ctx.reduced_norm(dir);
    for (double sign : {1.0, -1.0}) {
      const Vector v = sign * 0.5 * rho * dir;
      const ReducedValue ev = evaluate_reduced(ctx, v);
      SolutionRecord rec = sc.make_record(v, ev.tau.y, Provenance::linking, index++,
                                          (sign > 0 ? "+" : "-") + std::string("linking-basis-") + std::to_string(j));
      if (rec.reduced_grad_norm <= sc.plan().tol && rec.residual <= sc.plan().tol_res &&
          std::abs(rec.energy) <= sc.plan().tol_sign)
        out.push_back(std::move(rec));
    }
  }
  return out;
}

namespace {

bool distinct(const SolverContext& sc, const SolutionRecord& rec, const SolutionRecord& first) {
  return rec.l2_norm >= sc.d_min() && full_distance(rec, first) >= sc.d_min();
}

Attempt attempt_from(const std::string& strategy, const SolutionRecord& rec, const SolutionRecord& first,
                     bool converged) {
  Attempt a;
  a.strategy = strategy;
  a.start_index = rec.start_index;
  a.start_label = rec.start_label;
  a.converged = converged;
  a.energy = rec.energy;
  a.grad_norm = rec.reduced_grad_norm;
  a.distance = full_distance(rec, first);
  a.l2_norm = rec.l2_norm;
  return a;
}

}  // namespace

SolutionRecord second_critical_point(const SolverContext& sc, const SolutionRecord& first, const LinkingReport* linking,
                                     std::vector<Attempt>* log) {
  const ReductionContext& ctx = sc.reduction();
  const SearchPlan& plan = sc.plan();
  std::vector<Attempt> attempts;
  auto finish = [&](SolutionRecord rec) {
    if (log) log->insert(log->end(), attempts.begin(), attempts.end());
    return rec;
  };
  auto consider = [&](const std::string& strategy, SolutionRecord rec, bool converged,
                      int iterations = 0) -> std::optional<SolutionRecord> {
    Attempt a = attempt_from(strategy, rec, first, converged);
    a.iterations = iterations;
    const bool ok = converged && distinct(sc, rec, first);
    a.accepted = ok;
    if (converged && !ok)
      a.note = rec.l2_norm < sc.d_min() ? "trivial critical point" : "coincides with the first point";
    if (!converged) a.note = "did not reach the gradient tolerance";
    attempts.push_back(std::move(a));
    if (ok) return rec;
    return std::nullopt;
  };

  // Degenerate branch: the minimum is zero and the small linking ball is flat,
  // so every point of that ball is critical.
  if (!(first.energy < -plan.tol_sign)) {
    if (linking && linking->w_flat) {
      for (SolutionRecord& rec : flat_ball_points(sc, linking->rho))
        if (auto hit = consider("flat-linking-ball", rec, true)) return finish(*hit);
    } else {
      Attempt a;
      a.strategy = "flat-linking-ball";
      a.note = "linking ball not certified flat; falling back to the search ladder";
      attempts.push_back(a);
    }
  }

  const Metric metric = reduced_metric(sc);
  const DescentOptions dopt = descent_options(plan);
  Rng rng(plan.seed + 2);

  // (1) Deflated descent on (phi~(v) - phi~(v1)) (shift + d_min^2 / |v - v1|^2).
  {
    const double e1 = first.energy;
    const Vector v1 = first.v;
    const double d2 = sc.d_min() * sc.d_min();
    const double shift = plan.deflation_shift;
    Objective base = reduced_objective(ctx);
    // The deflated descent only has to leave the first point's basin; the
    // polish that follows converges on the undeflated functional.
    DescentOptions deflated_opt = dopt;
    deflated_opt.max_iter = std::min(dopt.max_iter, plan.deflation_iters);
    Objective deflated = [&, base](const Vector& v) {
      const Evaluation e = base(v);
      const Vector diff = v - v1;
      const double r2 = std::max(diff.squaredNorm(), 1e-300);
      const double factor = shift + d2 / r2;
      Evaluation out;
      out.value = (e.value - e1) * factor;
      out.gradient = factor * e.gradient - (e.value - e1) * (2.0 * d2 / (r2 * r2)) * diff;
      return out;
    };
    for (int i = 0; i < plan.deflation_starts; ++i) {
      const Vector v0 = (i % 2 == 0) ? Vector(plan.rho * ctx.random_direction(Block::linking, rng))
                                     : smooth_random(sc, rng, plan.rho * (1.0 + 4.0 * rng.uniform()));
      const std::string label = (i % 2 == 0) ? "linking-sphere" : "random";
      try {
        const DescentResult dr = descend(deflated, v0, deflated_opt, metric);
        bool ok = false;
        SolutionRecord rec = descend_from(sc, dr.x, Provenance::deflation, i, label, &ok);
        if (auto hit = consider("deflation", std::move(rec), ok, dr.iterations)) return finish(*hit);
      } catch (const ConvergenceError& e) {
        Attempt a;
        a.strategy = "deflation";
        a.start_index = i;
        a.start_label = label;
        a.note = e.what();
        attempts.push_back(a);
      }
    }
  }

  // (2) Mountain pass between 0 and the first point.
  {
    MountainPassOptions mo;
    mo.nodes = plan.mp_nodes;
    mo.max_iter = plan.mp_iters;
    mo.grad_tol = plan.tol;
    mo.barrier_tol = plan.tol_sign;
    try {
      const MountainPassResult mp =
          mountain_pass(reduced_objective(ctx), Vector::Zero(ctx.reduced_dimension()), first.v, mo, metric);
      if (mp.barrier) {
        const Polished p = polish(sc, mp.peak, std::nullopt);
        SolutionRecord rec = sc.make_record(p.v, p.y, Provenance::mountain_pass, 0, "path-peak");
        if (auto hit = consider("mountain-pass", std::move(rec), p.converged)) return finish(*hit);
      } else {
        Attempt a;
        a.strategy = "mountain-pass";
        a.start_label = "path 0 -> first";
        a.note = mp.message;
        attempts.push_back(a);
      }
    } catch (const ConvergenceError& e) {
      Attempt a;
      a.strategy = "mountain-pass";
      a.note = e.what();
      attempts.push_back(a);
    }
  }

  // (3) Descent from the mirror image of the first point and from linking-sphere points.
  {
    std::vector<std::pair<Vector, std::string>> starts;
    starts.emplace_back(-first.v, "mirror");
    for (int i = 0; i < plan.w_starts; ++i)
      starts.emplace_back(plan.rho * ctx.random_direction(Block::linking, rng), "linking-sphere");
    for (std::size_t i = 0; i < starts.size(); ++i) {
      const Provenance prov = i == 0 ? Provenance::minimizer : Provenance::linking;
      try {
        bool ok = false;
        SolutionRecord rec = descend_from(sc, starts[i].first, prov, static_cast<int>(i), starts[i].second, &ok);
        if (auto hit = consider("descent", std::move(rec), ok)) return finish(*hit);
      } catch (const ConvergenceError& e) {
        Attempt a;
        a.strategy = "descent";
        a.start_index = static_cast<int>(i);
        a.start_label = starts[i].second;
        a.note = e.what();
        attempts.push_back(a);
      }
    }
  }

  if (log) log->insert(log->end(), attempts.begin(), attempts.end());
  std::ostringstream os;
  os << "search exhausted after " << attempts.size() << " attempts; near misses:";
  int misses = 0;
  for (const Attempt& a : attempts)
    if (a.converged && !a.accepted) {
      os << " [" << a.strategy << " " << a.start_label << ": energy " << a.energy << ", |u|_M " << a.l2_norm
         << ", distance " << a.distance << "]";
      ++misses;
    }
  if (misses == 0) os << " none";
  throw SearchExhausted(os.str(), std::move(attempts));
}

VerificationReport verify_solution(const EnergyContext& ctx, const Vector& u, double tol_res, double d_min) {
  VerificationReport rep;
  rep.tol_res = tol_res;
  rep.d_min = d_min;
  const Vector g = grad_phi(ctx, u);
  Eigen::SimplicialLDLT<SparseMatrix> mass(ctx.mass().matrix());
  Eigen::SimplicialLDLT<SparseMatrix> h1(ctx.h1().matrix());
  if (mass.info() != Eigen::Success || h1.info() != Eigen::Success)
    throw ConvergenceError("verification: factorization failed", 0.0);
  rep.residual = dual_norm(mass, g);
  rep.gradient_norm = dual_norm(h1, g);
  rep.l2_norm = std::sqrt(std::max(0.0, ctx.mass().quadratic(u)));
  rep.energy = phi(ctx, u);
  rep.nontrivial = rep.l2_norm >= d_min;
  rep.pass = rep.residual <= tol_res && rep.nontrivial;

  const Mesh& mesh = ctx.mesh();
  if (mesh.dim() == 1 && mesh.node_count() >= 3) {
    // Nodes of an interval mesh are ordered left to right.
    const int n = mesh.node_count();
    const auto& disc = ctx.discretization();
    for (Side side : {Side::left, Side::right}) {
      const int i0 = side == Side::left ? 0 : n - 1;
      const int i1 = side == Side::left ? 1 : n - 2;
      const int i2 = side == Side::left ? 2 : n - 3;
      const double h = std::abs(mesh.node(i1).x - mesh.node(i0).x);
      const std::array<int, 2> nodes{i0, -1};
      const std::array<double, 2> shape{1.0, 0.0};
      const double beta = disc.beta.evaluate(mesh.node(i0), std::span<const int>(nodes.data(), 1),
                                             std::span<const double>(shape.data(), 1), side);
      EndpointCheck c;
      c.side = side;
      c.normal_derivative = (u[i0] - u[i1]) / h;
      c.expected = -beta * u[i0];
      const double second = std::abs(u[i2] - 2.0 * u[i1] + u[i0]) / (h * h);
      const std::array<int, 2> cell{i0, i1};
      const std::array<double, 2> at0{1.0, 0.0};
      const double xi = std::abs(disc.xi.evaluate(mesh.node(i0), cell, at0));
      const double f = std::abs(ctx.reaction().value(mesh.node(i0), u[i0]));
      c.tolerance = h * (second + xi * std::abs(u[i0]) + f) + 1e-10;
      c.pass = std::abs(c.normal_derivative - c.expected) <= c.tolerance;
      rep.endpoint_checks.push_back(c);
    }
  }
  return rep;
}

RoundtripReport roundtrip_check(const SolverContext& sc, const SolutionRecord& rec, double tol_res,
                                double tol_reproject) {
  const ReductionContext& ctx = sc.reduction();
  RoundtripReport r;
  r.full_gradient_norm = sc.h1_dual_norm(grad_phi(sc.energy(), rec.u));
  const Vector v = ctx.reduced_coordinates(rec.u);
  const TauResult t = tau(ctx, v);
  const Vector back = ctx.assemble(v, t.y);
  r.reprojection_error = sc.mass_norm(back - rec.u);
  r.pass = r.full_gradient_norm <= tol_res && r.reprojection_error <= tol_reproject;
  return r;
}

std::shared_ptr<const Reaction> make_reaction(const ReactionSpec& spec, const SpectralLevels& lv, int m, int l) {
  switch (spec.kind) {
    case ReactionSpec::Kind::model: {
      const double a_s = spec.softening ? *spec.softening : spec.softening_fraction * (lv.lambda_m1 - lv.lambda_m);
      return std::make_shared<ModelReaction>(model_reaction(lv, m, l, a_s, spec.band));
    }
    case ReactionSpec::Kind::linear:
      return std::make_shared<LinearReaction>(spec.slope.value_or(lv.lambda_m1), m, l, spec.band);
    case ReactionSpec::Kind::square: return std::make_shared<SquareReaction>(m, l);
    case ReactionSpec::Kind::custom:
      if (!spec.custom) throw InvalidArgument("custom reaction spec without a reaction");
      return spec.custom;
  }
  throw InvalidArgument("unknown reaction kind");
}

SolutionSet run_pipeline(const Problem& problem) {
  SolutionSet out;
  out.disc = problem.disc;
  if (!problem.disc) throw InvalidArgument("problem without a discretization");
  const Discretization& disc = *problem.disc;
  std::string stage;
  auto fail = [&](const std::string& what) {
    out.success = false;
    out.failed_stage = stage;
    out.failure = what;
    return out;
  };
  try {
    stage = "spectrum";
    PencilOptions popt = problem.spectrum;
    if (disc.order() > popt.dense_limit)
      return fail("the subspace split needs every eigenpair; order " + std::to_string(disc.order()) +
                  " exceeds the dense limit " + std::to_string(popt.dense_limit));
    popt.method = EigenMethod::dense;
    out.spectrum = solve_pencil(disc.gamma, disc.mass, disc.order(), popt);
    out.first_eigen = first_eigen_report(out.spectrum);

    stage = "split";
    auto split = std::make_shared<const SubspaceSplit>(out.spectrum, disc.mass, problem.m, problem.l);
    out.levels = SpectralLevels{split->lambda_m(), split->lambda_m1(), split->lambda_l1(), split->lambda_l()};

    stage = "hypotheses";
    out.reaction = make_reaction(problem.reaction, *out.levels, problem.m, problem.l);
    SamplingGrid grid;
    if (!out.reaction->autonomous())
      for (const QuadPoint& q : disc.mesh.quadrature()) grid.z_samples.push_back(q.z);
    out.hypotheses = audit_hypotheses(*out.reaction, *out.levels, grid);
    if (auto bad = out.hypotheses->first_failure())
      return fail("reaction violates " + to_string(*bad) + ": " + out.hypotheses->verdict(*bad).detail);

    stage = "certificates";
    out.coercivity = coercivity_shift(disc.gamma, disc.mass, disc.h1, popt);
    const ReactionParameters& rp = out.reaction->parameters();
    out.concave_gap = gap_certificate(GapSide::lower, disc, out.spectrum, problem.m,
                                      CoefficientField::constant(rp.monotonicity_floor));
    out.tail_gap = gap_certificate(GapSide::upper, disc, out.spectrum, problem.l,
                                   CoefficientField::constant(rp.band_upper));

    stage = "reduction";
    auto reduction = std::make_shared<const ReductionContext>(EnergyContext(problem.disc, out.reaction), split,
                                                              *out.concave_gap, problem.tau);
    SolverContext sc(reduction, problem.plan);
    const SearchPlan& plan = sc.plan();
    out.d_min = sc.d_min();
    out.concavity = sample_concavity(*reduction, plan.concavity_samples, plan.seed + 5);

    stage = "linking";
    out.linking = linking_sign_check(*reduction, plan.rho, plan.linking_samples, plan.seed, plan.tol_sign, plan.tol,
                                     plan.max_halvings);
    out.coercivity_probe =
        coercivity_probe(*reduction, plan.probe_directions, plan.probe_radii, plan.seed + 4, plan.tol_sign);

    stage = "minimize";
    SolutionRecord first = minimize_reduced(sc, &out.attempts);
    out.flat_branch = !(first.energy < -plan.tol_sign) && out.linking->w_flat;
    if (out.flat_branch && first.l2_norm < sc.d_min()) {
      // The minimizer is the trivial point; the flat ball supplies both solutions.
      auto pts = flat_ball_points(sc, out.linking->rho);
      if (pts.empty()) return fail("flat linking ball has no verified points");
      first = pts.front();
    }

    stage = "second-point";
    SolutionRecord second = second_critical_point(sc, first, &*out.linking, &out.attempts);

    stage = "verify";
    out.records = {first, second};
    out.separation = full_distance(first, second);
    bool all_ok = out.separation >= sc.d_min();
    for (const SolutionRecord& rec : out.records) {
      out.verifications.push_back(verify_solution(sc.energy(), rec.u, plan.tol_res, sc.d_min()));
      out.roundtrips.push_back(roundtrip_check(sc, rec, plan.tol_res));
      all_ok = all_ok && out.verifications.back().pass && out.roundtrips.back().pass &&
               rec.reduced_grad_norm <= plan.tol;
    }
    if (!all_ok) return fail("a returned solution did not pass verification");
    out.success = true;
    return out;
  } catch (const Error& e) {
    return fail(e.what());
  }
}

SolutionSet solve_problem(const Problem& problem) {
  SolutionSet s = run_pipeline(problem);
  if (!s.success) {
    auto partial = std::make_shared<const SolutionSet>(s);
    throw StageError(s.failed_stage, s.failure, partial);
  }
  return s;
}

}  // namespace semirobin
