#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>

#include "semirobin/energy.hpp"
#include "semirobin/errors.hpp"
#include "semirobin/rng.hpp"
#include "semirobin/spectrum.hpp"
#include "semirobin/subspaces.hpp"

namespace semirobin {

struct TauControls {
  int max_iter = 100;
  /// Absolute, on the A-dual norm of the restricted gradient.
  double grad_tol = 1e-10;
  double armijo = 1e-4;
  int max_backtracks = 60;

  bool operator==(const TauControls&) const = default;
};

/// Maximizer of y -> phi(v + y) over the concave block.
struct TauResult {
  Vector y;  ///< coordinates in the concave block
  int iterations = 0;
  double grad_norm = 0.0;
  double energy = 0.0;  ///< phi(v + y)
  bool used_fallback = false;
};

/// Inner maximization did not converge; carries the best iterate.
class TauError : public ConvergenceError {
 public:
  TauError(const std::string& what, double attained, Vector best)
      : ConvergenceError(what, attained), best_(std::move(best)) {}
  const Vector& best() const noexcept { return best_; }

 private:
  Vector best_;
};

/// Value and gradient of the reduced functional at one point.
struct ReducedValue {
  double value = 0.0;
  Vector gradient;  ///< reduced-block coordinates
  TauResult tau;
};

/// Energy, spectral split and concavity certificate of the reduction.
///
/// Points of the reduced block V (resonant + upper) and of the concave block
/// are handled through their coordinates in the eigenbasis. Because the basis
/// is M-orthonormal and diagonalizes G, the quadratic part of the energy is
/// 1/2 sum lambda_k c_k^2 and the gradient in coordinates is
/// Lambda c - basis' load(u). A gradient in block coordinates is the
/// M-orthogonal projection of the Riesz representative M^{-1} grad onto the
/// block, which reduces to basis_block' grad.
class ReductionContext {
 public:
  /// `concavity` must be a lower-side gap certificate with positive constant.
  ReductionContext(EnergyContext energy, std::shared_ptr<const SubspaceSplit> split, GapCertificate concavity,
                   TauControls controls = {});

  const EnergyContext& energy() const { return energy_; }
  const SubspaceSplit& split() const { return *split_; }
  const std::shared_ptr<const SubspaceSplit>& split_ptr() const { return split_; }
  const GapCertificate& concavity() const { return concavity_; }
  double c1() const { return concavity_.constant; }
  const TauControls& controls() const { return controls_; }

  int concave_dimension() const { return split_->dimension(Block::concave); }
  int reduced_dimension() const { return split_->dimension(Block::reduced); }

  /// basis_V v + basis_- y.
  Vector assemble(const Vector& v, const Vector& y) const;
  /// basis_V' M u.
  Vector reduced_coordinates(const Vector& u) const { return split_->coordinates(Block::reduced, u); }
  Vector concave_coordinates(const Vector& u) const { return split_->coordinates(Block::concave, u); }

  /// phi(v + y) evaluated in eigen-coordinates.
  double energy_at(const Vector& v, const Vector& y) const;
  /// basis_-' grad phi(v + y).
  Vector restricted_gradient(const Vector& v, const Vector& y) const;

  /// sqrt(g' A_-^{-1} g) with A_- the H1 Gram matrix of the concave block.
  double concave_dual_norm(const Vector& g) const;
  double concave_norm(const Vector& y) const;
  /// sqrt(g' A_V^{-1} g).
  double reduced_dual_norm(const Vector& g) const;
  double reduced_norm(const Vector& v) const;

  /// Random reduced-block coordinates supported in `block` (reduced, resonant,
  /// linking, tail or upper) with unit H1 norm, uniform on that sphere.
  Vector random_direction(Block block, Rng& rng) const;
  /// Same for the concave block, in concave coordinates.
  Vector random_concave_direction(Rng& rng) const;

  /// Eigenvalues belonging to the reduced and concave blocks.
  const Vector& reduced_eigenvalues() const { return lambda_v_; }
  const Vector& concave_eigenvalues() const { return lambda_c_; }

 private:
  double dual_norm(const Eigen::LLT<DenseMatrix>& llt, const Vector& g) const;

  EnergyContext energy_;
  std::shared_ptr<const SubspaceSplit> split_;
  GapCertificate concavity_;
  TauControls controls_;
  Vector lambda_c_, lambda_v_;
  DenseMatrix gram_;  // basis' A basis
  Eigen::LLT<DenseMatrix> llt_concave_, llt_reduced_;
  std::vector<std::pair<Block, Eigen::LLT<DenseMatrix>>> block_llt_;
};

/// tau(v): maximizer over the concave block, by damped Newton with a
/// gradient-ascent fallback where the restricted Hessian is not negative
/// definite. `warm` is a starting guess in concave coordinates.
TauResult tau(const ReductionContext& ctx, const Vector& v, const std::optional<Vector>& warm = std::nullopt);

ReducedValue evaluate_reduced(const ReductionContext& ctx, const Vector& v,
                              const std::optional<Vector>& warm = std::nullopt);
double phi_tilde(const ReductionContext& ctx, const Vector& v);
Vector grad_phi_tilde(const ReductionContext& ctx, const Vector& v);

/// Values of the reduced functional along one ray t * direction.
struct RayProbe {
  Vector direction;
  std::vector<double> values;
  bool tail_increasing = true;
};

struct CoercivityReport {
  std::vector<double> radii;
  std::vector<RayProbe> rays;
  double tol_sign = 1e-10;

  int flagged() const;
  bool all_increasing() const { return flagged() == 0; }
};

/// Random unit directions (H1 norm) in the reduced block.
CoercivityReport coercivity_probe(const ReductionContext& ctx, int directions, const std::vector<double>& radii,
                                  std::uint64_t seed, double tol_sign = 1e-10);
/// Explicit directions (reduced coordinates, normalized internally).
CoercivityReport coercivity_probe(const ReductionContext& ctx, const std::vector<Vector>& directions,
                                  const std::vector<double>& radii, double tol_sign = 1e-10);

/// Sampled strong concavity of the inner problem:
///   (g(y) - g(y'))'(y - y') + c1 |y - y'|_A^2 <= slack.
struct ConcavitySample {
  int samples = 0;
  int violations = 0;
  double worst_margin = 0.0;  ///< largest left-hand side seen
  double slack = 1e-8;
};

ConcavitySample sample_concavity(const ReductionContext& ctx, int samples, std::uint64_t seed, double scale = 2.0,
                                 double slack = 1e-8);

}  // namespace semirobin
