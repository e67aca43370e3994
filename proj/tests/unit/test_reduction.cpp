#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "semirobin/rng.hpp"

using namespace semirobin;
using semirobin::testing::ModelSetup;

namespace {

const ModelSetup& model() {
  static const ModelSetup s(129);
  return s;
}

Vector random_reduced(const ReductionContext& ctx, Rng& rng, double scale) {
  return scale * rng.uniform(0.2, 1.0) * ctx.random_direction(Block::reduced, rng);
}

}  // namespace

TEST(Tau, VanishesAtOrigin) {
  const auto& ctx = *model().reduction;
  const TauResult t = tau(ctx, Vector::Zero(ctx.reduced_dimension()));
  EXPECT_LT(t.y.norm(), 1e-9);
}

TEST(Tau, MultiStartAgreement) {
  const auto& ctx = *model().reduction;
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector v = random_reduced(ctx, rng, 3.0);
    const Vector y0 = tau(ctx, v).y;
    for (int s = 0; s < 4; ++s) {
      const Vector warm = 5.0 * rng.normal_vector(ctx.concave_dimension());
      EXPECT_LT(ctx.concave_norm(tau(ctx, v, warm).y - y0), 1e-6);
    }
  }
}

TEST(Tau, MaximizesOverTheConcaveBlock) {
  const auto& ctx = *model().reduction;
  Rng rng(22);
  const Vector v = random_reduced(ctx, rng, 2.0);
  const TauResult t = tau(ctx, v);
  EXPECT_LT(ctx.concave_dual_norm(ctx.restricted_gradient(v, t.y)), 1e-9);
  for (int i = 0; i < 20; ++i) {
    const Vector y = t.y + 0.1 * ctx.random_concave_direction(rng);
    EXPECT_LE(ctx.energy_at(v, y), t.energy + 1e-12);
  }
}

TEST(Tau, LinearReactionDecouples) {
  const ModelSetup s(129, 1, 3, std::make_shared<const LinearReaction>(0.5, 1, 3));
  const auto& ctx = *s.reduction;
  Rng rng(23);
  for (int i = 0; i < 50; ++i) {
    const Vector v = random_reduced(ctx, rng, 10.0);
    EXPECT_LE(ctx.concave_norm(tau(ctx, v).y), 1e-8);
  }
}

TEST(ReducedFunctional, GradientMatchesCentralDifferences) {
  const auto& ctx = *model().reduction;
  Rng rng(24);
  for (int i = 0; i < 10; ++i) {
    const Vector v = random_reduced(ctx, rng, 2.0);
    const Vector g = grad_phi_tilde(ctx, v);
    const Vector d = ctx.random_direction(Block::reduced, rng);
    const double t = 1e-5;
    const double fd = (phi_tilde(ctx, v + t * d) - phi_tilde(ctx, v - t * d)) / (2 * t);
    EXPECT_LE(std::abs(g.dot(d) - fd), 1e-5 * std::max(std::abs(fd), 1e-3)) << i;
  }
}

TEST(ReducedFunctional, EqualsEnergyAtLift) {
  const auto& ctx = *model().reduction;
  Rng rng(25);
  const Vector v = random_reduced(ctx, rng, 1.0);
  const ReducedValue r = evaluate_reduced(ctx, v);
  const Vector u = ctx.assemble(v, r.tau.y);
  EXPECT_NEAR(r.value, phi(ctx.energy(), u), 1e-10 * (1 + std::abs(r.value)));
  EXPECT_LT((ctx.reduced_coordinates(u) - v).norm(), 1e-10 * (1 + v.norm()));
}

TEST(ReducedFunctional, StrongConcavitySampled) {
  const auto s = sample_concavity(*model().reduction, 200, 5);
  EXPECT_EQ(s.samples, 200);
  EXPECT_EQ(s.violations, 0);
  EXPECT_LE(s.worst_margin, s.slack);
}

TEST(ReducedFunctional, CoercivityProbeRaysIncrease) {
  const auto r = coercivity_probe(*model().reduction, 32, {1.0, 10.0, 50.0}, 4);
  EXPECT_EQ(r.rays.size(), 32u);
  EXPECT_EQ(r.flagged(), 0);
}

TEST(ReductionContext, RejectsNonpositiveConcavityConstant) {
  const auto& s = model();
  GapCertificate bad = s.reduction->concavity();
  bad.constant = -1.0;
  EXPECT_THROW(ReductionContext(s.energy(), s.split, bad), CertificateError);
  GapCertificate upper = s.reduction->concavity();
  upper.side = GapSide::upper;
  EXPECT_THROW(ReductionContext(s.energy(), s.split, upper), InvalidArgument);
}

TEST(ReductionContext, RandomDirectionsHaveUnitNorm) {
  const auto& ctx = *model().reduction;
  Rng rng(26);
  for (Block b : {Block::reduced, Block::linking, Block::tail, Block::resonant}) {
    const Vector v = ctx.random_direction(b, rng);
    EXPECT_NEAR(ctx.reduced_norm(v), 1.0, 1e-12) << to_string(b);
  }
}
