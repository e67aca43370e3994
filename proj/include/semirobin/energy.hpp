#pragma once

#include <memory>

#include "semirobin/fem.hpp"
#include "semirobin/nonlinearity.hpp"

namespace semirobin {

/// Everything the energy phi(u) = 1/2 u'Gu - int F(z, u_h) needs.
///
/// Gradients are returned as plain coefficient vectors paired with test
/// vectors by the Euclidean dot product, h' grad = d/dt phi(u + t h).
class EnergyContext {
 public:
  EnergyContext(std::shared_ptr<const Discretization> disc, std::shared_ptr<const Reaction> reaction);

  const Discretization& discretization() const { return *disc_; }
  const std::shared_ptr<const Discretization>& discretization_ptr() const { return disc_; }
  const Reaction& reaction() const { return *reaction_; }
  const std::shared_ptr<const Reaction>& reaction_ptr() const { return reaction_; }
  const Mesh& mesh() const { return disc_->mesh; }
  const SymmetricForm& gamma() const { return disc_->gamma; }
  const SymmetricForm& mass() const { return disc_->mass; }
  const SymmetricForm& h1() const { return disc_->h1; }
  int order() const { return disc_->order(); }

 private:
  std::shared_ptr<const Discretization> disc_;
  std::shared_ptr<const Reaction> reaction_;
};

double phi(const EnergyContext& ctx, const Vector& u);
/// Gu - load(u).
Vector grad_phi(const EnergyContext& ctx, const Vector& u);
/// (G - J(u)) h.
Vector hess_phi_action(const EnergyContext& ctx, const Vector& u, const Vector& h);
/// G - J(u) as a sparse form.
SymmetricForm hessian(const EnergyContext& ctx, const Vector& u);

}  // namespace semirobin
