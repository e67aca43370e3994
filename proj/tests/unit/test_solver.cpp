#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "semirobin/rng.hpp"

using namespace semirobin;
using semirobin::testing::full_spectrum;
using semirobin::testing::interval_problem;
using semirobin::testing::ModelSetup;

namespace {

Problem reference_problem(int n, int l) {
  Problem p;
  p.disc = interval_problem(0.0, std::numbers::pi, n, -0.5, 0.0);
  p.m = 1;
  p.l = l;
  return p;
}

}  // namespace

TEST(Verify, EigenvectorSolvesLinearProblem) {
  // With f(x) = lambda_k x every k-th eigenvector is an exact discrete solution.
  auto disc = interval_problem(0.0, 1.0, 101, 0.0, 1.0);
  const auto e = full_spectrum(*disc);
  const double lambda = e.distinct_value(3);
  const EnergyContext ctx(disc, std::make_shared<const LinearReaction>(lambda, 1, 3));
  const Vector u = e.vectors.col(e.cluster(3).first);
  const auto r = verify_solution(ctx, u, 1e-7, 1e-3);
  EXPECT_LT(r.residual, 1e-9);
  EXPECT_NEAR(r.l2_norm, 1.0, 1e-10);
  EXPECT_TRUE(r.nontrivial);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.endpoint_checks.size(), 2u);
}

TEST(Verify, NegativeControls) {
  auto disc = interval_problem(0.0, 1.0, 101, 0.0, 1.0);
  const EnergyContext ctx(disc, std::make_shared<const LinearReaction>(2.0, 1, 3));
  Rng rng(31);
  const auto noisy = verify_solution(ctx, rng.normal_vector(101), 1e-7, 1e-3);
  EXPECT_FALSE(noisy.pass);
  EXPECT_GT(noisy.residual, 1e-3);
  const auto zero = verify_solution(ctx, Vector::Zero(101), 1e-7, 1e-3);
  EXPECT_LT(zero.residual, 1e-14);
  EXPECT_FALSE(zero.nontrivial);
  EXPECT_FALSE(zero.pass);
}

TEST(Verify, DefaultSeparationScale) {
  EXPECT_NEAR(default_d_min(build_interval_mesh(0.0, 4.0, 5)), 2e-3, 1e-15);
  EXPECT_NEAR(default_d_min(build_rectangle_mesh(1.0, 1.0, 3, 3)), 1e-3, 1e-15);
}

TEST(Linking, SignsHoldOnSmallBall) {
  const ModelSetup s(129);
  const auto r = linking_sign_check(*s.reduction, 1.0, 200, 17);
  EXPECT_TRUE(r.satisfied);
  EXPECT_EQ(r.w_fraction, 1.0);
  EXPECT_EQ(r.e_fraction, 1.0);
  EXPECT_LE(r.rho, 1.0);
  EXPECT_FALSE(r.rounds.empty());
}

TEST(Search, NegativeMinimumAndItsMirror) {
  const ModelSetup s(129, 1, 4);
  SearchPlan plan;
  const SolverContext sc(s.reduction, plan);
  std::vector<Attempt> log;
  const SolutionRecord first = minimize_reduced(sc, &log);
  EXPECT_LT(first.energy, -0.1);
  EXPECT_LT(first.reduced_grad_norm, plan.tol);
  EXPECT_FALSE(log.empty());
  const SolutionRecord second = second_critical_point(sc, first, nullptr, &log);
  EXPECT_GE(sc.mass_norm(first.u - second.u), sc.d_min());
  EXPECT_TRUE(verify_solution(sc.energy(), second.u, plan.tol_res, sc.d_min()).pass);
  EXPECT_TRUE(roundtrip_check(sc, second, plan.tol_res).pass);
}

TEST(Pipeline, ReferenceProblemYieldsTwoSolutions) {
  const SolutionSet s = run_pipeline(reference_problem(129, 3));
  ASSERT_TRUE(s.success) << s.failed_stage << ": " << s.failure;
  ASSERT_EQ(s.records.size(), 2u);
  for (const auto& v : s.verifications) EXPECT_TRUE(v.pass);
  for (const auto& r : s.roundtrips) EXPECT_TRUE(r.pass);
  EXPECT_GE(s.separation, s.d_min);
  EXPECT_TRUE(s.hypotheses->all_pass());
}

TEST(Pipeline, SeedReproducesRecordsExactly) {
  const Problem p = reference_problem(97, 4);
  const SolutionSet a = run_pipeline(p);
  const SolutionSet b = run_pipeline(p);
  ASSERT_TRUE(a.success) << a.failure;
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].u, b.records[i].u);
    EXPECT_EQ(a.records[i].energy, b.records[i].energy);
  }
}

TEST(Pipeline, LinearReactionStopsAtAudit) {
  Problem p = reference_problem(65, 3);
  p.reaction.kind = ReactionSpec::Kind::linear;
  const SolutionSet s = run_pipeline(p);
  EXPECT_FALSE(s.success);
  EXPECT_EQ(s.failed_stage, "hypotheses");
  EXPECT_TRUE(s.records.empty());
  try {
    solve_problem(p);
    FAIL() << "linear reaction accepted";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "hypotheses");
    EXPECT_TRUE(e.partial().hypotheses.has_value());
  }
}

TEST(Pipeline, LargeOrderIsRefusedBeforeSearch) {
  Problem p = reference_problem(65, 3);
  p.spectrum.dense_limit = 10;
  const SolutionSet s = run_pipeline(p);
  EXPECT_FALSE(s.success);
  EXPECT_EQ(s.failed_stage, "spectrum");
}

TEST(Reactions, FactoryKinds) {
  const SpectralLevels lv{-0.5, 0.5, 0.5, 3.5};
  ReactionSpec spec;
  EXPECT_EQ(make_reaction(spec, lv, 1, 3)->name(), "model");
  spec.kind = ReactionSpec::Kind::linear;
  auto lin = make_reaction(spec, lv, 1, 3);
  EXPECT_EQ(lin->name(), "linear");
  EXPECT_DOUBLE_EQ(lin->value({}, 2.0), 1.0);
  spec.kind = ReactionSpec::Kind::square;
  EXPECT_EQ(make_reaction(spec, lv, 1, 3)->name(), "square");
  spec.kind = ReactionSpec::Kind::custom;
  EXPECT_THROW(make_reaction(spec, lv, 1, 3), InvalidArgument);
}
