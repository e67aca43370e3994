#pragma once

#include <cmath>
#include <memory>

#include "semirobin/solver.hpp"

namespace semirobin::testing {

inline std::shared_ptr<const Discretization> interval_problem(double a, double b, int n, double xi, double beta) {
  return std::make_shared<const Discretization>(
      discretize(build_interval_mesh(a, b, n), CoefficientField::constant(xi), CoefficientField::constant(beta)));
}

inline EigenDecomposition full_spectrum(const Discretization& d) {
  PencilOptions o;
  o.method = EigenMethod::dense;
  return solve_pencil(d.gamma, d.mass, d.order(), o);
}

/// Neumann interval (0, pi), xi = -0.5, model reaction, at a modest mesh size.
struct ModelSetup {
  std::shared_ptr<const Discretization> disc;
  EigenDecomposition spectrum;
  std::shared_ptr<const SubspaceSplit> split;
  SpectralLevels levels;
  std::shared_ptr<const Reaction> reaction;
  std::shared_ptr<const ReductionContext> reduction;

  explicit ModelSetup(int n = 129, int m = 1, int l = 3, std::shared_ptr<const Reaction> custom = nullptr) {
    disc = interval_problem(0.0, std::acos(-1.0), n, -0.5, 0.0);
    spectrum = full_spectrum(*disc);
    split = std::make_shared<const SubspaceSplit>(spectrum, disc->mass, m, l);
    levels = {split->lambda_m(), split->lambda_m1(), split->lambda_l1(), split->lambda_l()};
    reaction = custom ? custom : make_reaction(ReactionSpec{}, levels, m, l);
    const auto gap = gap_certificate(GapSide::lower, *disc, spectrum, m,
                                     CoefficientField::constant(reaction->parameters().monotonicity_floor));
    reduction = std::make_shared<const ReductionContext>(EnergyContext(disc, reaction), split, gap);
  }

  EnergyContext energy() const { return EnergyContext(disc, reaction); }
};

}  // namespace semirobin::testing
