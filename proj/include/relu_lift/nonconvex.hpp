#pragma once

#include "relu_lift/mappings.hpp"

#include <random>

namespace relu_lift {

struct TrainConfig {
  std::size_t m = 5;
  std::uint64_t seed = 0;
  double lr = 1.0;           // largest step the line search may try
  int max_steps = 200000;
  double stationarity_tol = 1e-10;
  double init_scale = 0.5;

  void validate() const {
    if (m < 1) throw Error(ErrorCode::invalid_instance, "m must be >= 1");
    if (!(lr > 0.0)) throw Error(ErrorCode::invalid_instance, "lr must be positive");
    if (!(init_scale >= 0.0)) throw Error(ErrorCode::invalid_instance, "init_scale must be >= 0");
  }
};

struct TrainResult {
  NeuralNet net;
  std::vector<double> objective;  // per accepted step, starting with the initial point
  std::vector<double> grad_norm;
  int steps = 0;
  bool converged = false;
};

/// Gradient of the objective with the convention relu'(0) = 0.
inline NeuralNet objective_gradient(const ProblemInstance& inst, const NeuralNet& net) {
  const VectorXd lam = loss_gradient(inst, predict(inst.X, net));
  NeuralNet g;
  g.neurons.reserve(net.size());
  for (const auto& nr : net.neurons) {
    const VectorXd z = inst.X * nr.u;
    VectorXd masked = lam;
    for (Eigen::Index k = 0; k < z.size(); ++k)
      if (!(z[k] > 0.0)) masked[k] = 0.0;
    g.neurons.push_back(Neuron{nr.alpha * (inst.X.transpose() * masked) + inst.beta * nr.u,
                               lam.dot(relu(z)) + inst.beta * nr.alpha});
  }
  return g;
}

inline double squared_norm(const NeuralNet& net) {
  double s = 0.0;
  for (const auto& nr : net.neurons) s += nr.u.squaredNorm() + nr.alpha * nr.alpha;
  return s;
}

inline NeuralNet axpy(const NeuralNet& x, double a, const NeuralNet& dir) {
  NeuralNet out = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.neurons[i].u += a * dir.neurons[i].u;
    out.neurons[i].alpha += a * dir.neurons[i].alpha;
  }
  return out;
}

/// u uniform on the sphere of radius init_scale, alpha = +-init_scale.
inline NeuralNet random_init(Eigen::Index d, std::size_t m, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  NeuralNet net;
  for (std::size_t i = 0; i < m; ++i) {
    VectorXd u(d);
    for (Eigen::Index j = 0; j < d; ++j) u[j] = g(rng);
    if (u.norm() > 0) u *= scale / u.norm();
    net.neurons.push_back(Neuron{u, coin(rng) ? scale : -scale});
  }
  return net;
}

/// Full-batch gradient descent with Armijo backtracking from `start`.
inline TrainResult train_gd_from(const ProblemInstance& inst, NeuralNet start, const TrainConfig& cfg) {
  inst.validate();
  check_dims(inst, start);
  TrainResult res;
  res.net = std::move(start);
  double f = objective_nc(inst, res.net);
  if (!std::isfinite(f)) throw Error(ErrorCode::non_finite_loss, "initial objective is not finite");
  double step = cfg.lr;
  double safe_step = cfg.lr;  // last step accepted by a resolvable Armijo test
  for (int it = 0; it < cfg.max_steps; ++it) {
    const NeuralNet g = objective_gradient(inst, res.net);
    const double gn2 = squared_norm(g);
    res.objective.push_back(f);
    res.grad_norm.push_back(std::sqrt(gn2));
    if (std::sqrt(gn2) <= cfg.stationarity_tol) {
      res.converged = true;
      break;
    }
    // Once the Armijo decrease drops below the roundoff of f, the objective
    // cannot rank points any more: fall back to fixed steps of the last
    // resolvable length, rejecting only visible increases.
    const double noise = 1e-15 * (1.0 + std::abs(f));
    const bool resolvable = 1e-4 * std::min(cfg.lr, 2.0 * step) * gn2 >= noise;
    step = resolvable ? std::min(cfg.lr, 2.0 * step) : std::min(step, safe_step);
    NeuralNet trial;
    double f_trial = 0.0;
    while (true) {
      trial = axpy(res.net, -step, g);
      f_trial = objective_nc(inst, trial);
      if (std::isfinite(f_trial)) {
        const double decrease = 1e-4 * step * gn2;
        if (decrease >= noise ? f_trial <= f - decrease : f_trial <= f + noise) break;
      }
      step *= 0.5;
      if (step < 1e-20) break;
    }
    if (1e-4 * step * gn2 >= noise) safe_step = step;
    if (!std::isfinite(f_trial)) throw Error(ErrorCode::non_finite_loss, "objective diverged at step " + std::to_string(it));
    if (step < 1e-20) break;  // line search stalled (kink)
    res.net = std::move(trial);
    f = f_trial;
    res.steps = it + 1;
  }
  return res;
}

inline TrainResult train_gd(const ProblemInstance& inst, const TrainConfig& cfg) {
  cfg.validate();
  return train_gd_from(inst, random_init(inst.d(), cfg.m, cfg.init_scale, cfg.seed), cfg);
}

struct ClarkeResidual {
  double residual_norm = 0.0;
  std::vector<VectorXd> selection;  // delta_j on the boundary rows of neuron j (empty if none)
  std::vector<std::vector<int>> boundary_rows;
  std::vector<double> grad_outer;   // beta alpha_j + lambda' (X u_j)_+
  std::vector<double> per_neuron;
};

namespace detail {

/// min ||b + A delta|| over delta in [0,1]^k. Small k: exhaustive over
/// {0, 1, free} assignments; large k: projected gradient.
inline VectorXd box_least_squares(const MatrixXd& A, const VectorXd& b) {
  const Eigen::Index k = A.cols();
  VectorXd best = VectorXd::Zero(k);
  if (k == 0) return best;
  double best_val = b.norm();
  if (k <= 9) {
    long total = 1;
    for (Eigen::Index i = 0; i < k; ++i) total *= 3;
    for (long code = 0; code < total; ++code) {
      VectorXd delta(k);
      std::vector<Eigen::Index> free;
      long c = code;
      for (Eigen::Index i = 0; i < k; ++i, c /= 3) {
        const int s = static_cast<int>(c % 3);
        delta[i] = s == 1 ? 1.0 : 0.0;
        if (s == 2) free.push_back(i);
      }
      if (!free.empty()) {
        MatrixXd Af(A.rows(), static_cast<Eigen::Index>(free.size()));
        for (std::size_t j = 0; j < free.size(); ++j) Af.col(static_cast<Eigen::Index>(j)) = A.col(free[j]);
        const VectorXd rhs = -(b + A * delta);
        const VectorXd sol = Af.completeOrthogonalDecomposition().solve(rhs);
        bool inside = true;
        for (std::size_t j = 0; j < free.size(); ++j) {
          if (sol[static_cast<Eigen::Index>(j)] < 0.0 || sol[static_cast<Eigen::Index>(j)] > 1.0) inside = false;
          delta[free[j]] = sol[static_cast<Eigen::Index>(j)];
        }
        if (!inside) continue;
      }
      const double val = (b + A * delta).norm();
      if (val < best_val) {
        best_val = val;
        best = delta;
      }
    }
    return best;
  }
  const double L = std::max(1e-300, A.squaredNorm());
  VectorXd delta = VectorXd::Constant(k, 0.5);
  for (int it = 0; it < 20000; ++it)
    delta = (delta - (A.transpose() * (b + A * delta)) / L).cwiseMax(0.0).cwiseMin(1.0);
  return delta;
}

}  // namespace detail

/// Distance of zero from the Clarke subdifferential, neuron by neuron.
///
/// Rows with |(Xu)_k| <= 1e-9 ||x_k|| ||u|| count as boundary rows, where
/// the ReLU derivative ranges over [0,1]; elsewhere it is 1(Xu > 0).
inline ClarkeResidual clarke_residual(const ProblemInstance& inst, const NeuralNet& net) {
  check_dims(inst, net);
  const VectorXd lam = loss_gradient(inst, predict(inst.X, net));
  ClarkeResidual out;
  double total = 0.0;
  for (const auto& nr : net.neurons) {
    const VectorXd z = inst.X * nr.u;
    const double un = nr.u.norm();
    VectorXd active = VectorXd::Zero(z.size());
    std::vector<int> boundary;
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      if (std::abs(z[k]) <= 1e-9 * inst.X.row(k).norm() * un) boundary.push_back(static_cast<int>(k));
      else if (z[k] > 0.0) active[k] = lam[k];
    }
    const VectorXd b = inst.beta * nr.u + nr.alpha * (inst.X.transpose() * active);
    MatrixXd A(inst.d(), static_cast<Eigen::Index>(boundary.size()));
    for (std::size_t j = 0; j < boundary.size(); ++j)
      A.col(static_cast<Eigen::Index>(j)) = nr.alpha * lam[boundary[j]] * inst.X.row(boundary[j]).transpose();
    const VectorXd delta = detail::box_least_squares(A, b);
    const double ru = (b + A * delta).norm();
    const double ra = inst.beta * nr.alpha + lam.dot(relu(z));
    out.selection.push_back(delta);
    out.boundary_rows.push_back(std::move(boundary));
    out.grad_outer.push_back(ra);
    out.per_neuron.push_back(std::sqrt(ru * ru + ra * ra));
    total += ru * ru + ra * ra;
  }
  out.residual_norm = std::sqrt(total);
  return out;
}

/// Rescales every neuron to ||u|| = |alpha| = sqrt(||u|| |alpha|); neurons
/// with u = 0 or alpha = 0 become (0, 0).
inline NeuralNet scale_neurons(const NeuralNet& net) {
  NeuralNet out = net;
  for (auto& nr : out.neurons) {
    const double un = nr.u.norm(), an = std::abs(nr.alpha);
    if (un == 0.0 || an == 0.0) {
      nr.u.setZero();
      nr.alpha = 0.0;
      continue;
    }
    if (un == an) continue;
    const double c = std::sqrt(an / un);
    nr.u *= c;
    nr.alpha /= c;
  }
  return out;
}

/// Replaces the neurons of every cone whose members are not all positively
/// colinear by |U_B| copies of the aggregate direction w / |U_B|.
inline NeuralNet align_neurons(const Arrangement& arr, const NeuralNet& net) {
  if (!is_scaled(net)) throw Error(ErrorCode::not_scaled, "align_neurons needs a scaled network");
  NeuralNet out = net;
  for (const auto& [cone, members] : group_by_cone(arr, net)) {
    bool colinear = true;
    for (std::size_t k = 1; k < members.size() && colinear; ++k)
      colinear = positively_colinear(net.neurons[members[0]].u, net.neurons[members[k]].u);
    if (colinear) continue;
    VectorXd w = VectorXd::Zero(arr.X().cols());
    for (auto i : members) w += std::abs(net.neurons[i].alpha) * net.neurons[i].u;
    const VectorXd share = w / static_cast<double>(members.size());
    const double r = std::sqrt(share.norm());
    for (auto i : members) {
      if (r == 0.0) {
        out.neurons[i] = Neuron{VectorXd::Zero(w.size()), 0.0};
        continue;
      }
      out.neurons[i] = Neuron{share / r, cone.sign * r};
    }
  }
  return out;
}

}  // namespace relu_lift
