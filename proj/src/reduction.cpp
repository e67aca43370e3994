#include "semirobin/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semirobin {

ReductionContext::ReductionContext(EnergyContext energy, std::shared_ptr<const SubspaceSplit> split,
                                   GapCertificate concavity, TauControls controls)
    : energy_(std::move(energy)), split_(std::move(split)), concavity_(std::move(concavity)), controls_(controls) {
  if (!split_) throw InvalidArgument("reduction needs a subspace split");
  if (split_->order() != energy_.order()) throw InvalidArgument("split order does not match the energy");
  if (concavity_.side != GapSide::lower)
    throw InvalidArgument("reduction needs the concave-side gap certificate");
  if (!(concavity_.constant > 0.0))
    throw CertificateError("concavity constant c1 is not positive; the inner maximization is not certified",
                           concavity_);
  if (controls_.max_iter < 1 || !(controls_.grad_tol > 0.0)) throw InvalidArgument("invalid tau controls");

  const int d = concave_dimension();
  const int r = reduced_dimension();
  const DenseMatrix& basis = split_->basis();
  lambda_c_ = split_->eigenvalues().head(d);
  lambda_v_ = split_->eigenvalues().tail(r);
  const DenseMatrix a_basis = energy_.h1().matrix() * basis;
  gram_ = basis.transpose() * a_basis;
  gram_ = 0.5 * (gram_ + gram_.transpose()).eval();
  if (d > 0) llt_concave_.compute(gram_.topLeftCorner(d, d));
  llt_reduced_.compute(gram_.bottomRightCorner(r, r));
  if (llt_reduced_.info() != Eigen::Success || (d > 0 && llt_concave_.info() != Eigen::Success))
    throw ConvergenceError("H1 Gram matrix of a spectral block is not positive definite", 0.0);
  for (Block b : {Block::resonant, Block::upper, Block::linking, Block::tail}) {
    const int off = split_->offset_in(b, Block::reduced);
    const int w = split_->dimension(b);
    if (w == 0) continue;
    block_llt_.emplace_back(b, Eigen::LLT<DenseMatrix>(gram_.block(d + off, d + off, w, w)));
  }
}

Vector ReductionContext::assemble(const Vector& v, const Vector& y) const {
  return split_->lift(Block::reduced, v) + split_->lift(Block::concave, y);
}

double ReductionContext::energy_at(const Vector& v, const Vector& y) const {
  const Vector u = assemble(v, y);
  const double quad = 0.5 * (lambda_v_.dot(v.cwiseProduct(v)) + lambda_c_.dot(y.cwiseProduct(y)));
  return quad - nemytskii_energy(energy_.mesh(), energy_.reaction(), u);
}

Vector ReductionContext::restricted_gradient(const Vector& v, const Vector& y) const {
  const Vector u = assemble(v, y);
  const Vector load = nemytskii_load(energy_.mesh(), energy_.reaction(), u);
  return lambda_c_.cwiseProduct(y) - split_->basis(Block::concave).transpose() * load;
}

double ReductionContext::dual_norm(const Eigen::LLT<DenseMatrix>& llt, const Vector& g) const {
  if (g.size() == 0) return 0.0;
  const Vector w = llt.matrixL().solve(g);
  return w.norm();
}

double ReductionContext::concave_dual_norm(const Vector& g) const { return dual_norm(llt_concave_, g); }
double ReductionContext::reduced_dual_norm(const Vector& g) const { return dual_norm(llt_reduced_, g); }

double ReductionContext::concave_norm(const Vector& y) const {
  const int d = concave_dimension();
  if (d == 0) return 0.0;
  return std::sqrt(std::max(0.0, y.dot(gram_.topLeftCorner(d, d) * y)));
}

double ReductionContext::reduced_norm(const Vector& v) const {
  const int r = reduced_dimension();
  return std::sqrt(std::max(0.0, v.dot(gram_.bottomRightCorner(r, r) * v)));
}

Vector ReductionContext::random_direction(Block block, Rng& rng) const {
  const int r = reduced_dimension();
  Vector out = Vector::Zero(r);
  if (block == Block::reduced) {
    const Vector w = rng.normal_vector(r);
    out = llt_reduced_.matrixU().solve(w / w.norm());
    return out;
  }
  for (const auto& [b, llt] : block_llt_) {
    if (b != block) continue;
    const int off = split_->offset_in(b, Block::reduced);
    const int w = split_->dimension(b);
    const Vector g = rng.normal_vector(w);
    out.segment(off, w) = llt.matrixU().solve(g / g.norm());
    return out;
  }
  throw InvalidArgument("no sampling available for block " + to_string(block));
}

Vector ReductionContext::random_concave_direction(Rng& rng) const {
  const int d = concave_dimension();
  if (d == 0) return Vector();
  const Vector w = rng.normal_vector(d);
  return llt_concave_.matrixU().solve(w / w.norm());
}

namespace {

// Everything tau needs at one concave iterate.
struct InnerPoint {
  Vector y;
  Vector u;
  double value = 0.0;
  Vector grad;
  double grad_norm = 0.0;
};

InnerPoint inner_point(const ReductionContext& ctx, const Vector& base_u, double base_quad, const Vector& y) {
  InnerPoint p;
  p.y = y;
  p.u = base_u + ctx.split().lift(Block::concave, y);
  const auto& mesh = ctx.energy().mesh();
  const auto& reaction = ctx.energy().reaction();
  const Vector& lc = ctx.concave_eigenvalues();
  p.value = base_quad + 0.5 * lc.dot(y.cwiseProduct(y)) - nemytskii_energy(mesh, reaction, p.u);
  const Vector load = nemytskii_load(mesh, reaction, p.u);
  p.grad = lc.cwiseProduct(y) - ctx.split().basis(Block::concave).transpose() * load;
  p.grad_norm = ctx.concave_dual_norm(p.grad);
  return p;
}

}  // namespace

TauResult tau(const ReductionContext& ctx, const Vector& v, const std::optional<Vector>& warm) {
  const int d = ctx.concave_dimension();
  if (v.size() != ctx.reduced_dimension())
    throw InvalidArgument("tau: expected " + std::to_string(ctx.reduced_dimension()) + " reduced coordinates");
  const TauControls& c = ctx.controls();
  const Vector base_u = ctx.split().lift(Block::reduced, v);
  const double base_quad = 0.5 * ctx.reduced_eigenvalues().dot(v.cwiseProduct(v));

  Vector y0 = Vector::Zero(d);
  if (warm) {
    if (warm->size() != d) throw InvalidArgument("tau: warm start has the wrong dimension");
    y0 = *warm;
  }
  InnerPoint cur = inner_point(ctx, base_u, base_quad, y0);
  // A warm start must not be worse than y = 0, the point the envelope bound uses.
  if (warm && d > 0) {
    InnerPoint zero = inner_point(ctx, base_u, base_quad, Vector::Zero(d));
    if (zero.value > cur.value) cur = std::move(zero);
  }

  TauResult result;
  const auto& basis_c = ctx.split().basis(Block::concave);
  double bb_step = 1.0;
  Vector prev_y, prev_g;
  int it = 0;
  for (; it < c.max_iter && cur.grad_norm > c.grad_tol; ++it) {
    // Newton direction on the concave problem: solve (-H) s = g with
    // H = Lambda_- - basis_-' J basis_-.
    const SymmetricForm jac = nemytskii_jacobian(ctx.energy().mesh(), ctx.energy().reaction(), cur.u);
    const DenseMatrix jb = jac.matrix() * basis_c;
    DenseMatrix neg_h = basis_c.transpose() * jb;
    neg_h.diagonal() -= ctx.concave_eigenvalues();
    neg_h = 0.5 * (neg_h + neg_h.transpose()).eval();
    Eigen::LLT<DenseMatrix> llt(neg_h);
    Vector s;
    bool newton = llt.info() == Eigen::Success;
    if (newton) {
      s = llt.solve(cur.grad);
      newton = s.allFinite();
    }
    if (!newton) {
      result.used_fallback = true;
      if (prev_y.size() == d && it > 0) {
        const Vector dy = cur.y - prev_y, dg = cur.grad - prev_g;
        const double sy = dy.dot(dg);
        if (sy < 0.0) bb_step = std::clamp(-dy.squaredNorm() / sy, 1e-12, 1e12);
      }
      s = bb_step * cur.grad;
    }

    const double slope = cur.grad.dot(s);
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < c.max_backtracks; ++k, t *= 0.5) {
      InnerPoint trial = inner_point(ctx, base_u, base_quad, cur.y + t * s);
      const bool armijo = trial.value >= cur.value + c.armijo * t * slope;
      // Near the maximizer value differences drown in rounding; a full Newton
      // step that shrinks the gradient is accepted on that basis.
      const bool shrinks = newton && k == 0 && trial.grad_norm < cur.grad_norm;
      if (armijo || shrinks) {
        prev_y = cur.y;
        prev_g = cur.grad;
        cur = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  result.iterations = it;
  result.grad_norm = cur.grad_norm;
  result.energy = cur.value;
  result.y = cur.y;
  if (!(cur.grad_norm <= c.grad_tol))
    throw TauError("inner maximization stalled at restricted gradient norm " + std::to_string(cur.grad_norm),
                   cur.grad_norm, cur.y);
  return result;
}

ReducedValue evaluate_reduced(const ReductionContext& ctx, const Vector& v, const std::optional<Vector>& warm) {
  ReducedValue out;
  out.tau = tau(ctx, v, warm);
  out.value = out.tau.energy;
  const Vector u = ctx.assemble(v, out.tau.y);
  const Vector load = nemytskii_load(ctx.energy().mesh(), ctx.energy().reaction(), u);
  out.gradient = ctx.reduced_eigenvalues().cwiseProduct(v) - ctx.split().basis(Block::reduced).transpose() * load;
  return out;
}

double phi_tilde(const ReductionContext& ctx, const Vector& v) { return tau(ctx, v).energy; }

Vector grad_phi_tilde(const ReductionContext& ctx, const Vector& v) { return evaluate_reduced(ctx, v).gradient; }

int CoercivityReport::flagged() const {
  return static_cast<int>(std::count_if(rays.begin(), rays.end(), [](const RayProbe& r) { return !r.tail_increasing; }));
}

CoercivityReport coercivity_probe(const ReductionContext& ctx, const std::vector<Vector>& directions,
                                  const std::vector<double>& radii, double tol_sign) {
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (!(radii[k] > radii[k - 1])) throw InvalidArgument("coercivity probe radii must increase");
  CoercivityReport report;
  report.radii = radii;
  report.tol_sign = tol_sign;
  if (radii.empty()) return report;
  for (const Vector& dir : directions) {
    const double norm = ctx.reduced_norm(dir);
    if (!(norm > 0.0)) throw InvalidArgument("coercivity probe direction has zero norm");
    RayProbe ray;
    ray.direction = dir / norm;
    std::optional<Vector> warm;
    for (double t : radii) {
      const TauResult r = tau(ctx, t * ray.direction, warm);
      warm = r.y;
      ray.values.push_back(r.energy);
    }
    if (ray.values.size() > 1) {
      const double earlier = *std::max_element(ray.values.begin(), ray.values.end() - 1);
      ray.tail_increasing = ray.values.back() - earlier > tol_sign;
    }
    report.rays.push_back(std::move(ray));
  }
  return report;
}

CoercivityReport coercivity_probe(const ReductionContext& ctx, int directions, const std::vector<double>& radii,
                                  std::uint64_t seed, double tol_sign) {
  Rng rng(seed);
  std::vector<Vector> dirs;
  for (int k = 0; k < directions; ++k) dirs.push_back(ctx.random_direction(Block::reduced, rng));
  return coercivity_probe(ctx, dirs, radii, tol_sign);
}

ConcavitySample sample_concavity(const ReductionContext& ctx, int samples, std::uint64_t seed, double scale,
                                 double slack) {
  ConcavitySample out;
  out.slack = slack;
  out.worst_margin = -std::numeric_limits<double>::infinity();
  if (ctx.concave_dimension() == 0) return out;
  Rng rng(seed);
  for (int k = 0; k < samples; ++k) {
    const Vector v = scale * rng.uniform() * ctx.random_direction(Block::reduced, rng);
    const Vector y1 = scale * rng.uniform() * ctx.random_concave_direction(rng);
    const Vector y2 = scale * rng.uniform() * ctx.random_concave_direction(rng);
    const Vector g1 = ctx.restricted_gradient(v, y1), g2 = ctx.restricted_gradient(v, y2);
    const Vector dy = y1 - y2;
    const double n = ctx.concave_norm(dy);
    const double margin = (g1 - g2).dot(dy) + ctx.c1() * n * n;
    ++out.samples;
    if (margin > slack) ++out.violations;
    out.worst_margin = std::max(out.worst_margin, margin);
  }
  return out;
}

}  // namespace semirobin
