#include <gtest/gtest.h>

#include <numbers>

#include "fixtures.hpp"
#include "semirobin/rng.hpp"

using namespace semirobin;
using semirobin::testing::full_spectrum;
using semirobin::testing::interval_problem;

class SplitTest : public ::testing::Test {
 protected:
  void SetUp() override {
    disc = interval_problem(0.0, std::numbers::pi, 60, -0.5, 0.0);
    spectrum = full_spectrum(*disc);
  }
  std::shared_ptr<const Discretization> disc;
  EigenDecomposition spectrum;
};

TEST_F(SplitTest, BlockRangesTileTheSpace) {
  const SubspaceSplit s(spectrum, disc->mass, 1, 4);
  EXPECT_EQ(s.dimension(Block::concave), 1);
  EXPECT_EQ(s.dimension(Block::resonant), 1);
  EXPECT_EQ(s.dimension(Block::linking), 2);
  EXPECT_EQ(s.dimension(Block::reduced), 59);
  EXPECT_EQ(s.dimension(Block::tail), 57);
  EXPECT_EQ(s.dimension(Block::upper), 58);
  EXPECT_EQ(s.offset_in(Block::linking, Block::reduced), 0);
  EXPECT_EQ(s.offset_in(Block::tail, Block::reduced), 2);
  EXPECT_THROW(s.offset_in(Block::concave, Block::reduced), InvalidArgument);
  EXPECT_DOUBLE_EQ(s.lambda_m(), spectrum.distinct_value(1));
  EXPECT_DOUBLE_EQ(s.lambda_l(), spectrum.distinct_value(4));
}

TEST_F(SplitTest, ComponentsSumAndAreMassOrthogonal) {
  const SubspaceSplit s(spectrum, disc->mass, 2, 5);
  Rng rng(3);
  const Vector u = rng.normal_vector(s.order());
  const auto [c, r, up] = s.components(u);
  EXPECT_LT((c + r + up - u).norm(), 1e-10 * u.norm());
  EXPECT_NEAR(disc->mass.bilinear(c, r), 0.0, 1e-10);
  EXPECT_NEAR(disc->mass.bilinear(c, up), 0.0, 1e-10);
  EXPECT_NEAR(disc->mass.bilinear(r, up), 0.0, 1e-10);
  // Projection is idempotent.
  EXPECT_LT((s.project(Block::upper, up) - up).norm(), 1e-10);
}

TEST_F(SplitTest, LiftInvertsCoordinates) {
  const SubspaceSplit s(spectrum, disc->mass, 1, 3);
  Rng rng(5);
  const Vector coeffs = rng.normal_vector(s.dimension(Block::tail));
  const Vector u = s.lift(Block::tail, coeffs);
  EXPECT_LT((s.coordinates(Block::tail, u) - coeffs).norm(), 1e-10);
  EXPECT_LT(s.coordinates(Block::concave, u).norm(), 1e-10);
  EXPECT_THROW(s.lift(Block::tail, Vector::Zero(3)), InvalidArgument);
}

TEST_F(SplitTest, RejectsInvalidIndices) {
  EXPECT_THROW(SubspaceSplit(spectrum, disc->mass, 1, 2), HypothesisError);
  EXPECT_THROW(SubspaceSplit(spectrum, disc->mass, 0, 3), InvalidArgument);
  const auto partial = solve_pencil(disc->gamma, disc->mass, 6);
  EXPECT_THROW(SubspaceSplit(partial, disc->mass, 1, 3), InvalidArgument);
}
