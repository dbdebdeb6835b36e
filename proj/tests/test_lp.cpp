#include "oracles.hpp"
#include "relu_lift/lp.hpp"
#include "relu_lift/nnls.hpp"

#include <gtest/gtest.h>

using namespace relu_lift;

TEST(DenseSimplex, TextbookMaximum) {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
  auto r = lp::maximize({{1, 0}, {0, 2}, {3, 2}}, {4, 12, 18}, {3, 5});
  ASSERT_EQ(r.status, lp::Status::optimal);
  EXPECT_NEAR(r.value, 36.0, 1e-12);
  EXPECT_NEAR(r.x[0], 2.0, 1e-12);
  EXPECT_NEAR(r.x[1], 6.0, 1e-12);
}

TEST(DenseSimplex, NegativeRightHandSideNeedsPhaseOne) {
  // max -x - y, x + y >= 2  ->  -2
  auto r = lp::maximize({{-1, -1}}, {-2}, {-1, -1});
  ASSERT_EQ(r.status, lp::Status::optimal);
  EXPECT_NEAR(r.value, -2.0, 1e-12);
}

TEST(DenseSimplex, DetectsInfeasible) {
  auto r = lp::maximize({{1}, {-1}}, {1, -2}, {1});
  EXPECT_EQ(r.status, lp::Status::infeasible);
}

TEST(DenseSimplex, DetectsUnbounded) {
  auto r = lp::maximize({{-1, 1}}, {1}, {1, 0});
  EXPECT_EQ(r.status, lp::Status::unbounded);
}

TEST(DenseSimplex, DegenerateEqualityRows) {
  // x - y = 0 twice, x + y <= 2, max x  ->  1
  auto r = lp::maximize({{1, -1}, {-1, 1}, {1, -1}, {-1, 1}, {1, 1}}, {0, 0, 0, 0, 2}, {1, 0});
  ASSERT_EQ(r.status, lp::Status::optimal);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(Nnls, MatchesExhaustiveActiveSets) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + trial % 6, n = 1 + trial % 7;
    MatrixXd A = oracle::random_matrix(rng, m, n);
    VectorXd b = oracle::random_vector(rng, m);
    auto res = nnls(A, b);
    ASSERT_TRUE(res.converged);
    EXPECT_GE(res.x.minCoeff(), 0.0);
    const VectorXd ref = oracle::brute_nnls(A, b);
    EXPECT_NEAR(res.residual_norm, (A * ref - b).norm(), 1e-9) << "trial " << trial;
  }
}

TEST(Nnls, ZeroColumnsAndZeroRhs) {
  MatrixXd A = MatrixXd::Zero(3, 2);
  VectorXd b(3);
  b << 1, 2, 3;
  auto res = nnls(A, b);
  EXPECT_EQ(res.x.norm(), 0.0);
  EXPECT_NEAR(res.residual_norm, b.norm(), 1e-15);
  auto res0 = nnls(MatrixXd::Identity(2, 2), VectorXd::Zero(2));
  EXPECT_EQ(res0.x.norm(), 0.0);
}
