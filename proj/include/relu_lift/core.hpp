#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace relu_lift {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class ErrorCode {
  invalid_instance,
  dim_mismatch,
  cap_exceeded,
  not_enumerated,
  infeasible_point,
  max_iter_exceeded,
  projection_stalled,
  not_minimal,
  not_nearly_minimal,
  not_scaled,
  too_few_neurons,
  spec_mismatch,
  non_finite_loss,
  not_stationary,
  solve_failed,
  parse_error,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_instance: return "InvalidInstance";
    case ErrorCode::dim_mismatch: return "DimMismatch";
    case ErrorCode::cap_exceeded: return "CapExceeded";
    case ErrorCode::not_enumerated: return "NotEnumerated";
    case ErrorCode::infeasible_point: return "InfeasiblePoint";
    case ErrorCode::max_iter_exceeded: return "MaxIterExceeded";
    case ErrorCode::projection_stalled: return "ProjectionStalled";
    case ErrorCode::not_minimal: return "NotMinimal";
    case ErrorCode::not_nearly_minimal: return "NotNearlyMinimal";
    case ErrorCode::not_scaled: return "NotScaled";
    case ErrorCode::too_few_neurons: return "TooFewNeurons";
    case ErrorCode::spec_mismatch: return "SpecMismatch";
    case ErrorCode::non_finite_loss: return "NonFiniteLoss";
    case ErrorCode::not_stationary: return "NotStationary";
    case ErrorCode::solve_failed: return "SolveFailed";
    case ErrorCode::parse_error: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class LossKind { squared, logistic };

inline LossKind parse_loss(const std::string& name) {
  if (name == "squared") return LossKind::squared;
  if (name == "logistic") return LossKind::logistic;
  throw Error(ErrorCode::parse_error, "unknown loss '" + name + "'");
}

inline const char* to_string(LossKind kind) {
  return kind == LossKind::squared ? "squared" : "logistic";
}

/// Training data and regularization shared by every operation.
///
/// The squared loss is `squared_weight * ||v - y||^2`; the default weight 1/2
/// gives the usual least-squares convention. The logistic loss is
/// `sum_k log(1 + exp(-y_k v_k))`.
struct ProblemInstance {
  MatrixXd X;
  VectorXd y;
  double beta = 1.0;
  LossKind loss = LossKind::squared;
  double squared_weight = 0.5;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }

  void validate() const {
    if (X.rows() < 1 || X.cols() < 1)
      throw Error(ErrorCode::invalid_instance, "X must have n >= 1 rows and d >= 1 columns");
    if (y.size() != X.rows())
      throw Error(ErrorCode::invalid_instance, "y has " + std::to_string(y.size()) +
                                                   " entries, expected " + std::to_string(X.rows()));
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw Error(ErrorCode::invalid_instance, "beta must be a positive finite number");
    if (!X.allFinite()) throw Error(ErrorCode::invalid_instance, "X contains non-finite entries");
    if (!y.allFinite()) throw Error(ErrorCode::invalid_instance, "y contains non-finite entries");
    if (!(squared_weight > 0.0)) throw Error(ErrorCode::invalid_instance, "squared_weight must be positive");
  }
};

inline double loss_value(const ProblemInstance& inst, const VectorXd& v) {
  if (inst.loss == LossKind::squared) return inst.squared_weight * (v - inst.y).squaredNorm();
  double total = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double z = -inst.y[k] * v[k];
    // log(1 + e^z) without overflow
    total += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  }
  return total;
}

inline VectorXd loss_gradient(const ProblemInstance& inst, const VectorXd& v) {
  if (inst.loss == LossKind::squared) return 2.0 * inst.squared_weight * (v - inst.y);
  VectorXd g(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double z = -inst.y[k] * v[k];
    const double s = z > 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    g[k] = -inst.y[k] * s;
  }
  return g;
}

/// Diagonal of the loss Hessian at prediction v.
inline VectorXd loss_hessian_diag(const ProblemInstance& inst, const VectorXd& v) {
  if (inst.loss == LossKind::squared) return VectorXd::Constant(v.size(), 2.0 * inst.squared_weight);
  VectorXd h(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double z = -inst.y[k] * v[k];
    const double s = z > 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    h[k] = inst.y[k] * inst.y[k] * s * (1.0 - s);
  }
  return h;
}

inline VectorXd relu(const VectorXd& z) { return z.cwiseMax(0.0); }

struct Neuron {
  VectorXd u;
  double alpha = 0.0;

  bool is_zero() const { return alpha == 0.0 || u.squaredNorm() == 0.0; }
};

/// Two-layer ReLU network: prediction sum_i relu(X u_i) alpha_i.
struct NeuralNet {
  std::vector<Neuron> neurons;

  std::size_t size() const { return neurons.size(); }

  static NeuralNet zeros(std::size_t m, Eigen::Index d) {
    NeuralNet net;
    net.neurons.assign(m, Neuron{VectorXd::Zero(d), 0.0});
    return net;
  }

  std::size_t nonzero_count() const {
    return static_cast<std::size_t>(
        std::count_if(neurons.begin(), neurons.end(), [](const Neuron& nr) { return !nr.is_zero(); }));
  }
};

inline void check_dims(const ProblemInstance& inst, const NeuralNet& net) {
  for (const auto& nr : net.neurons) {
    if (nr.u.size() != inst.d())
      throw Error(ErrorCode::dim_mismatch, "neuron has dimension " + std::to_string(nr.u.size()) +
                                               ", data has d = " + std::to_string(inst.d()));
  }
}

inline VectorXd predict(const MatrixXd& X, const NeuralNet& net) {
  VectorXd out = VectorXd::Zero(X.rows());
  for (const auto& nr : net.neurons) {
    if (nr.alpha == 0.0) continue;
    out += relu(X * nr.u) * nr.alpha;
  }
  return out;
}

/// Half the squared weight norm: (1/2) sum (||u||^2 + alpha^2).
inline double regularizer(const NeuralNet& net) {
  double r = 0.0;
  for (const auto& nr : net.neurons) r += nr.u.squaredNorm() + nr.alpha * nr.alpha;
  return 0.5 * r;
}

/// l(sum_i relu(X u_i) alpha_i) + (beta / 2) sum_i (||u_i||^2 + alpha_i^2).
inline double objective_nc(const ProblemInstance& inst, const NeuralNet& net) {
  check_dims(inst, net);
  return loss_value(inst, predict(inst.X, net)) + inst.beta * regularizer(net);
}

inline double sign_of(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

/// Worker count for internal parallel loops; RELU_LIFT_THREADS caps it.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RELU_LIFT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
  }
  return hw;
}

/// Runs body(i) for i in [0, count). Results must be written to disjoint slots.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const unsigned workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1 || count < 4) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace relu_lift
