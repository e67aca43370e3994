#pragma once

#include <functional>
#include <string>
#include <vector>

#include "semirobin/fem.hpp"

namespace semirobin {

struct Evaluation {
  double value = 0.0;
  Vector gradient;
};

/// Value and gradient at a point. May throw; callers see the exception.
using Objective = std::function<Evaluation(const Vector&)>;

/// Geometry used by the search routines. Empty members mean Euclidean.
struct Metric {
  /// Applies P^{-1} to a gradient.
  std::function<Vector(const Vector&)> precondition;
  /// Norm used in stopping tests.
  std::function<double(const Vector&)> dual_norm;

  Vector apply(const Vector& g) const { return precondition ? precondition(g) : g; }
  double norm(const Vector& g) const { return dual_norm ? dual_norm(g) : g.norm(); }
};

struct DescentOptions {
  int max_iter = 5000;
  double grad_tol = 1e-9;
  int window = 10;  ///< nonmonotone Armijo memory
  double armijo = 1e-4;
  int max_backtracks = 50;
};

struct DescentResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  double grad_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string stop_reason;
};

/// Preconditioned Barzilai-Borwein descent with a nonmonotone Armijo
/// safeguard.
DescentResult descend(const Objective& f, const Vector& x0, const DescentOptions& options = {},
                      const Metric& metric = {});

struct MountainPassOptions {
  int nodes = 64;
  int max_iter = 400;
  double grad_tol = 1e-9;
  /// The path maximum must exceed both endpoint values by more than this.
  double barrier_tol = 1e-10;
  int reparametrize_every = 5;
  int max_backtracks = 40;
};

struct MountainPassResult {
  bool barrier = false;    ///< path maximum stayed above the endpoints
  bool converged = false;  ///< gradient at the peak below grad_tol
  Vector peak;
  double value = 0.0;
  Vector gradient;
  double grad_norm = 0.0;
  int iterations = 0;
  std::string message;
  std::vector<double> profile;  ///< values along the final path
};

/// Path-deformation mountain pass between `a` and `b`: the highest interior
/// node of a discretized path moves along the negative (preconditioned)
/// gradient, the path maximum is recomputed, and nodes are respaced
/// periodically to equal arc length.
MountainPassResult mountain_pass(const Objective& f, const Vector& a, const Vector& b,
                                 const MountainPassOptions& options = {}, const Metric& metric = {});

}  // namespace semirobin
