#include "oracles.hpp"
#include "relu_lift/certificates.hpp"

#include <gtest/gtest.h>

using namespace relu_lift;

namespace {

ProblemInstance example1() {
  ProblemInstance inst;
  inst.X.resize(3, 2);
  inst.X << 1, 0, 0, 1, 1, 1;
  inst.y.resize(3);
  inst.y << 1, 0, 0;
  inst.beta = 0.1;
  return inst;
}

MatrixXd cone_rows(const ProblemInstance& inst, const Dichotomy& d) {
  MatrixXd G = inst.X;
  for (Eigen::Index k = 0; k < inst.n(); ++k)
    if (!d.pattern[static_cast<std::size_t>(k)]) G.row(k) *= -1.0;
  return G;
}

double L_c(const ProblemInstance& inst, const std::vector<Dichotomy>& ds, const ConvexPoint& W) {
  VectorXd v = VectorXd::Zero(inst.n());
  double r = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (Eigen::Index k = 0; k < inst.n(); ++k)
      if (ds[i].pattern[static_cast<std::size_t>(k)]) v[k] += (ds[i].positive ? 1.0 : -1.0) * inst.X.row(k).dot(W.blocks[i]);
    r += W.blocks[i].norm();
  }
  return 0.5 * (v - inst.y).squaredNorm() + inst.beta * r;
}

}  // namespace

TEST(Kkt, ThreeSampleOptimumIsCertified) {
  const auto inst = example1();
  const auto ds = enumerate_dichotomies(inst);
  const auto rep = solve_dichotomy_program(inst, ds);
  const auto cert = kkt_check(inst, ds, rep.point);
  EXPECT_TRUE(cert.global());
  EXPECT_LE(cert.stationarity_gap, 1e-9);
  ASSERT_EQ(cert.per_block.size(), 12u);
  EXPECT_TRUE(cert.per_block[4].nonzero);
  for (const auto& b : cert.per_block) {
    EXPECT_TRUE(b.pass);
    EXPECT_GE(b.duals.minCoeff(), 0.0);
  }
}

TEST(Kkt, ZeroBlockDualMatchesExhaustiveNnls) {
  // For a zero block the test is min_{zeta >= 0} ||g - G' zeta|| <= beta with
  // g = (D_i X)' grad l; recompute the minimum by enumeration.
  const auto inst = example1();
  const auto ds = enumerate_dichotomies(inst);
  const auto rep = solve_dichotomy_program(inst, ds);
  const auto cert = kkt_check(inst, ds, rep.point);
  const VectorXd lam = prediction_c(inst, ds, rep.point) - inst.y;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (cert.per_block[i].nonzero) continue;
    MatrixXd M = inst.X;
    for (Eigen::Index k = 0; k < inst.n(); ++k)
      if (!ds[i].pattern[static_cast<std::size_t>(k)]) M.row(k).setZero();
    if (!ds[i].positive) M = -M;
    const VectorXd g = M.transpose() * lam;
    const MatrixXd Gt = cone_rows(inst, ds[i]).transpose();
    const double res = (Gt * oracle::brute_nnls(Gt, g) - g).norm();
    EXPECT_NEAR(cert.per_block[i].residual, std::max(0.0, res - inst.beta), 1e-10) << "block " << i + 1;
    EXPECT_LE(res, inst.beta + 1e-9);
  }
}

TEST(Kkt, PerturbedOptimumIsRejected) {
  const auto inst = example1();
  const auto ds = enumerate_dichotomies(inst);
  const auto rep = solve_dichotomy_program(inst, ds);
  const MatrixXd G = cone_rows(inst, ds[4]);
  std::mt19937_64 rng(1);
  int tested = 0;
  for (int trial = 0; trial < 200; ++trial) {
    ConvexPoint Q = rep.point;
    VectorXd dir = oracle::random_vector(rng, 2);
    dir *= (0.01 + 0.2 * std::uniform_real_distribution<double>(0, 1)(rng)) / dir.norm();
    Q.blocks[4] = oracle::brute_cone_project(G, Q.blocks[4] + dir);
    if ((Q.blocks[4] - rep.point.blocks[4]).norm() < 1e-2) continue;
    ++tested;
    EXPECT_FALSE(kkt_check(inst, ds, Q).global()) << "trial " << trial;
  }
  EXPECT_GT(tested, 100);
  ConvexPoint zero = ConvexPoint::zeros(ds.size(), 2);
  EXPECT_FALSE(kkt_check(inst, ds, zero).global());
}

TEST(Kkt, InfeasiblePointThrows) {
  const auto inst = example1();
  const auto ds = enumerate_dichotomies(inst);
  ConvexPoint bad = ConvexPoint::zeros(ds.size(), 2);
  bad.blocks[0] = VectorXd::Ones(2);
  try {
    kkt_check(inst, ds, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::infeasible_point);
  }
}

TEST(Kkt, CertifiedPointsBeatRandomFeasiblePoints) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    ProblemInstance inst;
    inst.X = oracle::random_matrix(rng, 5, 2);
    inst.y = oracle::random_vector(rng, 5);
    inst.beta = 0.2;
    const auto ds = enumerate_dichotomies(inst);
    const auto rep = solve_dichotomy_program(inst, ds);
    ASSERT_TRUE(kkt_check(inst, ds, rep.point).global()) << "trial " << trial;
    const double f = L_c(inst, ds, rep.point);
    for (int s = 0; s < 200; ++s) {
      ConvexPoint Q = ConvexPoint::zeros(ds.size(), 2);
      for (std::size_t i = 0; i < ds.size(); ++i)
        Q.blocks[i] = oracle::brute_cone_project(cone_rows(inst, ds[i]), (s % 2 ? rep.point.blocks[i] : VectorXd::Zero(2)) +
                                                                             0.3 * oracle::random_vector(rng, 2));
      EXPECT_GE(L_c(inst, ds, Q), f - 1e-10);
    }
  }
}

TEST(GlobalOptimality, GdEndpointsAreCertified) {
  const auto inst = example1();
  const Arrangement arr(inst);
  const double optimum = solve_dichotomy_program(inst, arr.dichotomies()).objective;
  for (std::uint64_t seed : {1u, 10u}) {
    TrainConfig cfg;
    cfg.seed = seed;
    const auto net = train_gd(inst, cfg).net;
    const auto cert = check_global_optimality(inst, arr, net);
    EXPECT_TRUE(cert.global()) << "seed " << seed;
    EXPECT_NEAR(cert.objective, optimum, 1e-8);
    EXPECT_EQ(cert.point.nonzero_count(), 1u);
    EXPECT_TRUE(cert.point.block_nonzero(4));
  }
}

TEST(GlobalOptimality, CollapsedNetworkIsNotCertified) {
  const auto inst = example1();
  const Arrangement arr(inst);
  TrainConfig cfg;
  cfg.seed = 2;  // this seed collapses to the zero network
  const auto net = train_gd(inst, cfg).net;
  EXPECT_NEAR(objective_nc(inst, net), 0.5, 1e-8);
  EXPECT_FALSE(check_global_optimality(inst, arr, net).global());
}

TEST(SubsampledGap, GdEndpointMatchesItsSubsampledProgram) {
  const auto inst = example1();
  const Arrangement arr(inst);
  TrainConfig cfg;
  cfg.seed = 1;
  const auto net = train_gd(inst, cfg).net;
  const auto gap = subsampled_gap(inst, arr, net);
  EXPECT_LE(gap.correspondence, 1e-4);
  EXPECT_NEAR(gap.gap, 0.0, 1e-6);
  EXPECT_EQ(gap.active_set.size(), 1u);
}

TEST(SubsampledGap, SpuriousStationaryPointHasPositiveGap) {
  // X = [1; -1], y = [1; 1]: one neuron with u > 0 fits only the first
  // sample; its optimum on the cone (+,-) is c^2 = 1 - beta.
  ProblemInstance inst;
  inst.X.resize(2, 1);
  inst.X << 1, -1;
  inst.y = VectorXd::Ones(2);
  inst.beta = 0.1;
  const Arrangement arr(inst);
  const double c = std::sqrt(1.0 - inst.beta);
  NeuralNet net;
  net.neurons.push_back(Neuron{VectorXd::Constant(1, c), c});
  const auto gap = subsampled_gap(inst, arr, net);
  EXPECT_LE(gap.clarke, 1e-12);
  EXPECT_NEAR(gap.subsampled_optimum, objective_nc(inst, net), 1e-8);
  // the full program fits both samples with two neurons
  const double full = 2.0 * (0.5 * inst.beta * inst.beta + inst.beta * c * c);
  EXPECT_NEAR(gap.full_optimum, full, 1e-8);
  EXPECT_GT(gap.gap, 0.04);

  NeuralNet off = net;
  off.neurons[0].alpha = 2.0;
  try {
    subsampled_gap(inst, arr, off);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_stationary);
  }
}

TEST(Uniqueness, ThreeSampleIsUnique) {
  const auto inst = example1();
  const auto ds = enumerate_dichotomies(inst);
  const auto rep = solve_dichotomy_program(inst, ds);
  const auto u = verify_unique_optimum(inst, ds, rep.objective, 1e-4, {}, rep.point);
  EXPECT_TRUE(u.unique);
  EXPECT_LE(u.radius_inf, 1e-4);
  for (std::size_t j = 0; j < u.lower.size(); ++j) {
    EXPECT_TRUE(u.known[j]);
    const double x = rep.point.blocks[j / 2][static_cast<Eigen::Index>(j % 2)];
    EXPECT_LE(u.lower[j], x + 1e-12);
    EXPECT_GE(u.upper[j], x - 1e-12);
  }
}

TEST(Uniqueness, BoundaryOptimumIsNotUnique) {
  // X = I, y = (1, 0): the optimum (c, 0) lies on the shared boundary of the
  // cones of [1,0] and [1,1], so it can sit in either block.
  ProblemInstance inst;
  inst.X = MatrixXd::Identity(2, 2);
  inst.y.resize(2);
  inst.y << 1, 0;
  inst.beta = 0.1;
  const auto ds = enumerate_dichotomies(inst);
  const auto rep = solve_dichotomy_program(inst, ds);
  const double c = 1.0 - inst.beta;
  EXPECT_NEAR(rep.objective, 0.5 * inst.beta * inst.beta + inst.beta * c, 1e-9);
  const auto u = verify_unique_optimum(inst, ds, rep.objective, 1e-4, {}, rep.point);
  EXPECT_FALSE(u.unique);
  EXPECT_NEAR(u.radius_inf, c, 1e-3);
}
