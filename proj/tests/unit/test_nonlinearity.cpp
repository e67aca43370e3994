#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "semirobin/rng.hpp"

using namespace semirobin;

namespace {

const SpectralLevels kLevels{-0.5, 0.5, 0.5, 3.5};

// Composite Simpson rule for the integral of f(z, .) over [0, x].
double simpson(const Reaction& r, double x, int panels = 2000) {
  const double h = x / panels;
  const Point z;
  double s = r.value(z, 0.0) + r.value(z, x);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * r.value(z, i * h);
  return s * h / 3.0;
}

}  // namespace

TEST(ModelReaction, PrimitiveIntegratesValue) {
  const auto r = model_reaction(kLevels, 1, 3, 0.3, 0.1);
  for (double x : {0.05, 0.1, 0.37, 1.0, 4.0, -2.5, 30.0})
    EXPECT_NEAR(r.primitive({}, x), simpson(r, x), 1e-9 * (1 + x * x)) << x;
}

TEST(ModelReaction, OddAndSlopeMatchesDifferences) {
  const auto r = model_reaction(kLevels, 1, 3, 0.3, 0.1);
  for (double x : {0.03, 0.5, 2.0, 17.0}) {
    EXPECT_DOUBLE_EQ(r.value({}, -x), -r.value({}, x));
    const double h = 1e-6 * (1 + x);
    const double fd = (r.value({}, x + h) - r.value({}, x - h)) / (2 * h);
    EXPECT_NEAR(r.slope({}, x), fd, 1e-6 * (1 + std::abs(fd))) << x;
  }
  EXPECT_EQ(r.value({}, 0.0), 0.0);
}

TEST(ModelReaction, AsymptoticallyResonant) {
  const auto r = model_reaction(kLevels, 1, 3, 0.3, 0.1);
  const double x = 1e8;
  EXPECT_NEAR(r.value({}, x) / x, kLevels.lambda_m1, 1e-3);
  // Softening: f x - 2F grows without bound.
  EXPECT_GT(r.value({}, 1e4) * 1e4 - 2 * r.primitive({}, 1e4), r.value({}, 1e2) * 1e2 - 2 * r.primitive({}, 1e2));
}

TEST(ModelReaction, RejectsBadParameters) {
  EXPECT_THROW(model_reaction(kLevels, 1, 3, -0.1, 0.1), HypothesisError);
  EXPECT_THROW(model_reaction(kLevels, 1, 3, 0.3, 0.0), HypothesisError);
  EXPECT_THROW(model_reaction(kLevels, 1, 3, 1.5, 0.1), HypothesisError);
}

TEST(Audit, ModelReactionPassesEveryClause) {
  const auto r = model_reaction(kLevels, 1, 3, 0.3, 0.1);
  const auto report = audit_hypotheses(r, kLevels);
  for (const auto& v : report.verdicts) EXPECT_TRUE(v.pass) << to_string(v.clause) << ": " << v.detail;
  EXPECT_TRUE(report.all_pass());
  EXPECT_FALSE(report.first_failure());
}

TEST(Audit, LinearReactionFailsResonanceWithWitness) {
  const LinearReaction r(kLevels.lambda_m1, 1, 3);
  const auto report = audit_hypotheses(r, kLevels);
  ASSERT_TRUE(report.first_failure());
  EXPECT_EQ(*report.first_failure(), Clause::resonance);
  const auto& v = report.verdict(Clause::resonance);
  ASSERT_TRUE(v.witness);
  // f x - 2F vanishes identically for a linear reaction.
  EXPECT_NEAR(v.witness->observed, 0.0, 1e-6 * v.witness->x * v.witness->x);
  EXPECT_TRUE(report.verdict(Clause::growth).pass);
}

TEST(Audit, SquareReactionFailsGrowth) {
  const SquareReaction r(1, 3);
  const auto report = audit_hypotheses(r, kLevels);
  const auto& v = report.verdict(Clause::growth);
  EXPECT_FALSE(v.pass);
  ASSERT_TRUE(v.witness);
  EXPECT_GT(v.witness->observed, v.witness->bound);
}

TEST(Audit, NonzeroAtOriginFailsPreamble) {
  ReactionParameters p{1, 3, 2.0, -1.0, 0.1, 1.0};
  const CallableReaction r([](const Point&, double x) { return 0.5 * x + 1e-3; },
                           [](const Point&, double x) { return 0.25 * x * x + 1e-3 * x; },
                           [](const Point&, double) { return 0.5; }, p, "offset", true);
  const auto report = audit_hypotheses(r, kLevels);
  EXPECT_FALSE(report.verdict(Clause::preamble).pass);
}

TEST(Nemytskii, LoadIsGradientOfEnergy) {
  const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 6, 5);
  const auto r = model_reaction(kLevels, 1, 3, 0.3, 0.1);
  Rng rng(9);
  const Vector u = 0.3 * rng.normal_vector(mesh.node_count());
  const Vector h = rng.normal_vector(mesh.node_count());
  const double t = 1e-6;
  const double fd = (nemytskii_energy(mesh, r, u + t * h) - nemytskii_energy(mesh, r, u - t * h)) / (2 * t);
  EXPECT_NEAR(nemytskii_load(mesh, r, u).dot(h), fd, 1e-7 * (1 + std::abs(fd)));
}

TEST(Nemytskii, JacobianIsDerivativeOfLoad) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 40);
  const auto r = model_reaction(kLevels, 1, 3, 0.3, 0.1);
  Rng rng(10);
  const Vector u = 2.0 * rng.normal_vector(mesh.node_count());
  const Vector h = rng.normal_vector(mesh.node_count());
  const double t = 1e-7;
  const Vector fd = (nemytskii_load(mesh, r, u + t * h) - nemytskii_load(mesh, r, u - t * h)) / (2 * t);
  const Vector j = nemytskii_jacobian(mesh, r, u).apply(h);
  EXPECT_LT((j - fd).norm(), 1e-5 * (1 + fd.norm()));
}
