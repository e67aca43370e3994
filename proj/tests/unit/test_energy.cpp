#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "semirobin/rng.hpp"

using namespace semirobin;

namespace {

EnergyContext square_context() {
  auto disc = std::make_shared<const Discretization>(
      discretize(build_rectangle_mesh(1.0, 1.0, 7, 7),
                 CoefficientField::callable([](const Point& p) { return 3.0 * p.x - 1.0; }),
                 CoefficientField::constant(0.5)));
  auto r = std::make_shared<const ModelReaction>(model_reaction({1.0, 20.0, 20.0, 50.0}, 1, 3, 0.3, 0.1));
  return EnergyContext(disc, r);
}

}  // namespace

TEST(Energy, GradientMatchesCentralDifferences) {
  const EnergyContext ctx = square_context();
  Rng rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector u = rng.normal_vector(ctx.order());
    const Vector h = rng.normal_vector(ctx.order());
    const double t = 1e-6;
    const double fd = (phi(ctx, u + t * h) - phi(ctx, u - t * h)) / (2 * t);
    EXPECT_NEAR(grad_phi(ctx, u).dot(h), fd, 1e-6 * (1 + std::abs(fd)));
  }
}

TEST(Energy, HessianIsSymmetricAndDifferentiatesGradient) {
  const EnergyContext ctx = square_context();
  Rng rng(2);
  const Vector u = 0.5 * rng.normal_vector(ctx.order());
  const DenseMatrix h = hessian(ctx, u).dense();
  EXPECT_EQ((h - h.transpose()).cwiseAbs().maxCoeff(), 0.0);
  const Vector d = rng.normal_vector(ctx.order());
  const double t = 1e-7;
  const Vector fd = (grad_phi(ctx, u + t * d) - grad_phi(ctx, u - t * d)) / (2 * t);
  EXPECT_LT((hess_phi_action(ctx, u, d) - fd).norm(), 1e-5 * (1 + fd.norm()));
  EXPECT_LT((h * d - hess_phi_action(ctx, u, d)).norm(), 1e-10 * (1 + fd.norm()));
}

TEST(Energy, QuadraticPartForLinearReaction) {
  auto disc = semirobin::testing::interval_problem(0.0, 1.0, 30, 0.0, 1.0);
  auto r = std::make_shared<const LinearReaction>(2.0, 1, 3);
  const EnergyContext ctx(disc, r);
  Rng rng(3);
  const Vector u = rng.normal_vector(ctx.order());
  const double expected = 0.5 * disc->gamma.quadratic(u) - disc->mass.quadratic(u);
  EXPECT_NEAR(phi(ctx, u), expected, 1e-11 * (1 + std::abs(expected)));
}

TEST(Energy, RejectsMismatchedVector) {
  const EnergyContext ctx = square_context();
  EXPECT_THROW(phi(ctx, Vector::Zero(3)), InvalidArgument);
}
