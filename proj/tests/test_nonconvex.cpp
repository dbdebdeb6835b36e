#include "oracles.hpp"
#include "relu_lift/nonconvex.hpp"

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

ProblemInstance random_instance(std::mt19937_64& rng, int n, int d) {
  ProblemInstance inst;
  inst.X = oracle::random_matrix(rng, n, d);
  inst.y = oracle::random_vector(rng, n);
  inst.beta = 0.2;
  return inst;
}

NeuralNet random_net(std::mt19937_64& rng, int m, int d) {
  NeuralNet net;
  for (int i = 0; i < m; ++i) net.neurons.push_back(Neuron{oracle::random_vector(rng, d), oracle::random_vector(rng, 1)[0]});
  return net;
}

VectorXd yhat(const MatrixXd& X, const NeuralNet& net) {
  VectorXd v = VectorXd::Zero(X.rows());
  for (const auto& nr : net.neurons)
    for (Eigen::Index k = 0; k < X.rows(); ++k) v[k] += std::max(0.0, X.row(k).dot(nr.u)) * nr.alpha;
  return v;
}

}  // namespace

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(1);
  for (const auto loss : {LossKind::squared, LossKind::logistic}) {
    auto inst = random_instance(rng, 6, 3);
    inst.loss = loss;
    if (loss == LossKind::logistic) inst.y = inst.y.unaryExpr([](double v) { return v > 0 ? 1.0 : -1.0; });
    const NeuralNet net = random_net(rng, 4, 3);
    const NeuralNet g = objective_gradient(inst, net);
    const double h = 1e-6;
    for (std::size_t i = 0; i < net.size(); ++i) {
      for (Eigen::Index j = 0; j <= 3; ++j) {
        NeuralNet a = net, b = net;
        if (j < 3) {
          a.neurons[i].u[j] += h;
          b.neurons[i].u[j] -= h;
        } else {
          a.neurons[i].alpha += h;
          b.neurons[i].alpha -= h;
        }
        const double fd = (objective_nc(inst, a) - objective_nc(inst, b)) / (2 * h);
        const double an = j < 3 ? g.neurons[i].u[j] : g.neurons[i].alpha;
        EXPECT_NEAR(an, fd, 1e-6);
      }
    }
  }
}

TEST(TrainGd, ThreeSampleReachesTheConvexOptimum) {
  const auto inst = example1();
  const double optimum = solve_dichotomy_program(inst, enumerate_dichotomies(inst)).objective;
  for (std::uint64_t seed : {1u, 10u}) {
    TrainConfig cfg;
    cfg.seed = seed;
    const auto res = train_gd(inst, cfg);
    EXPECT_NEAR(res.objective.back(), optimum, 1e-8) << "seed " << seed;
    for (std::size_t k = 1; k < res.objective.size(); ++k)
      ASSERT_LE(res.objective[k], res.objective[k - 1] + 1e-15 * (1 + res.objective[k - 1]));
    EXPECT_TRUE(res.converged);
    int alive = 0;
    for (const auto& nr : res.net.neurons) alive += std::abs(nr.alpha) * nr.u.norm() > 1e-8;
    EXPECT_EQ(alive, 2) << "seed " << seed;
  }
}

TEST(TrainGd, DeterministicPerSeed) {
  const auto inst = example1();
  TrainConfig cfg;
  cfg.seed = 7;
  cfg.max_steps = 500;
  const auto a = train_gd(inst, cfg), b = train_gd(inst, cfg);
  ASSERT_EQ(a.net.size(), b.net.size());
  for (std::size_t i = 0; i < a.net.size(); ++i) {
    EXPECT_EQ(a.net.neurons[i].u, b.net.neurons[i].u);
    EXPECT_EQ(a.net.neurons[i].alpha, b.net.neurons[i].alpha);
  }
  cfg.seed = 8;
  const auto c = train_gd(inst, cfg);
  EXPECT_NE(a.net.neurons[0].u, c.net.neurons[0].u);
}

TEST(TrainGd, InitialisationOnSphere) {
  const NeuralNet net = random_init(3, 6, 0.5, 42);
  for (const auto& nr : net.neurons) {
    EXPECT_NEAR(nr.u.norm(), 0.5, 1e-15);
    EXPECT_EQ(std::abs(nr.alpha), 0.5);
  }
}

TEST(TrainGd, ErrorsOnBadInput) {
  auto inst = example1();
  TrainConfig cfg;
  cfg.m = 0;
  EXPECT_THROW(train_gd(inst, cfg), Error);
  cfg.m = 2;
  cfg.lr = -1;
  EXPECT_THROW(train_gd(inst, cfg), Error);
  inst.X *= 1e200;  // finite data, overflowing objective
  cfg.lr = 1;
  try {
    train_gd(inst, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_finite_loss);
  }
}

TEST(Clarke, SmoothPointEqualsGradientNorm) {
  std::mt19937_64 rng(2);
  const auto inst = random_instance(rng, 5, 2);
  const NeuralNet net = random_net(rng, 3, 2);
  const auto cr = clarke_residual(inst, net);
  EXPECT_NEAR(cr.residual_norm, std::sqrt(squared_norm(objective_gradient(inst, net))), 1e-12);
  for (const auto& b : cr.boundary_rows) EXPECT_TRUE(b.empty());
}

TEST(Clarke, SingleBoundaryRowClosedForm) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_instance(rng, 5, 3);
    // u orthogonal to x_0 puts row 0 on the ReLU kink
    VectorXd u = oracle::random_vector(rng, 3);
    const VectorXd x0 = inst.X.row(0).transpose();
    u -= (u.dot(x0) / x0.squaredNorm()) * x0;
    const double alpha = oracle::random_vector(rng, 1)[0];
    NeuralNet net;
    net.neurons.push_back(Neuron{u, alpha});
    const auto cr = clarke_residual(inst, net);
    ASSERT_EQ(cr.boundary_rows[0], std::vector<int>{0});
    // lambda = v - y; b from the strictly active rows, a from the kink row
    const VectorXd lam = yhat(inst.X, net) - inst.y;
    VectorXd b = inst.beta * u;
    for (Eigen::Index k = 1; k < 5; ++k)
      if (inst.X.row(k).dot(u) > 0) b += alpha * lam[k] * inst.X.row(k).transpose();
    const VectorXd a = alpha * lam[0] * x0;
    const double delta = std::clamp(-a.dot(b) / a.squaredNorm(), 0.0, 1.0);
    const double ru = (b + delta * a).norm();
    double ra = inst.beta * alpha;
    for (Eigen::Index k = 0; k < 5; ++k) ra += lam[k] * std::max(0.0, inst.X.row(k).dot(u));
    EXPECT_NEAR(cr.residual_norm, std::hypot(ru, ra), 1e-10) << "trial " << trial;
    EXPECT_NEAR(cr.selection[0][0], delta, 1e-8);
  }
}

TEST(Clarke, GdEndpointIsNearlyStationary) {
  const auto inst = example1();
  TrainConfig cfg;
  cfg.seed = 1;
  const auto res = train_gd(inst, cfg);
  EXPECT_LE(clarke_residual(inst, res.net).residual_norm, 1e-6);
}

TEST(BoxLeastSquares, MatchesGridSearch) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const MatrixXd A = oracle::random_matrix(rng, 3, 2);
    const VectorXd b = oracle::random_vector(rng, 3);
    const VectorXd x = detail::box_least_squares(A, b);
    double best = INFINITY;
    for (int i = 0; i <= 400; ++i)
      for (int j = 0; j <= 400; ++j) {
        VectorXd d(2);
        d << i / 400.0, j / 400.0;
        best = std::min(best, (b + A * d).norm());
      }
    EXPECT_LE((b + A * x).norm(), best + 1e-12);
    EXPECT_GE((b + A * x).norm(), best - 1e-2);
  }
}

TEST(Scale, PreservesPredictionsAndLowersRegularizer) {
  std::mt19937_64 rng(5);
  const auto inst = random_instance(rng, 5, 2);
  NeuralNet net = random_net(rng, 4, 2);
  net.neurons[3].alpha = 0.0;
  const NeuralNet s = scale_neurons(net);
  EXPECT_TRUE(is_scaled(s));
  EXPECT_LE((yhat(inst.X, s) - yhat(inst.X, net)).norm(), 1e-12);
  EXPECT_LE(regularizer(s), regularizer(net));
  EXPECT_TRUE(s.neurons[3].is_zero());
}

TEST(Align, NearlyMinimalWithSamePredictions) {
  ProblemInstance inst = example1();
  const Arrangement arr(inst);
  VectorXd a(2), b(2);
  a << 1, -0.5;
  b << 1, -0.8;
  NeuralNet net;
  net.neurons.push_back(Neuron{a / std::sqrt(a.norm()), std::sqrt(a.norm())});
  net.neurons.push_back(Neuron{b / std::sqrt(b.norm()), std::sqrt(b.norm())});
  EXPECT_FALSE(is_nearly_minimal(arr, net));
  const NeuralNet al = align_neurons(arr, net);
  EXPECT_TRUE(is_nearly_minimal(arr, al));
  EXPECT_LE((yhat(inst.X, al) - yhat(inst.X, net)).norm(), 1e-12);
  EXPECT_LT(regularizer(al), regularizer(net));
  NeuralNet unscaled = net;
  unscaled.neurons[0].alpha *= 2;
  try {
    align_neurons(arr, unscaled);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_scaled);
  }
}
