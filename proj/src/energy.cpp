#include "semirobin/energy.hpp"

#include "semirobin/errors.hpp"

namespace semirobin {

EnergyContext::EnergyContext(std::shared_ptr<const Discretization> disc, std::shared_ptr<const Reaction> reaction)
    : disc_(std::move(disc)), reaction_(std::move(reaction)) {
  if (!disc_ || !reaction_) throw InvalidArgument("energy context needs a discretization and a reaction");
  const int n = disc_->order();
  if (disc_->gamma.order() != n || disc_->mass.order() != n || disc_->h1.order() != n)
    throw InvalidArgument("form orders do not match the mesh");
}

namespace {
void check_order(const EnergyContext& ctx, const Vector& u) {
  if (u.size() != ctx.order())
    throw InvalidArgument("vector of order " + std::to_string(u.size()) + " for a problem of order " +
                          std::to_string(ctx.order()));
}
}  // namespace

double phi(const EnergyContext& ctx, const Vector& u) {
  check_order(ctx, u);
  return 0.5 * ctx.gamma().quadratic(u) - nemytskii_energy(ctx.mesh(), ctx.reaction(), u);
}

Vector grad_phi(const EnergyContext& ctx, const Vector& u) {
  check_order(ctx, u);
  return ctx.gamma().apply(u) - nemytskii_load(ctx.mesh(), ctx.reaction(), u);
}

Vector hess_phi_action(const EnergyContext& ctx, const Vector& u, const Vector& h) {
  check_order(ctx, u);
  check_order(ctx, h);
  return ctx.gamma().apply(h) - nemytskii_jacobian(ctx.mesh(), ctx.reaction(), u).apply(h);
}

SymmetricForm hessian(const EnergyContext& ctx, const Vector& u) {
  check_order(ctx, u);
  return ctx.gamma() - nemytskii_jacobian(ctx.mesh(), ctx.reaction(), u);
}

}  // namespace semirobin
