#pragma once

#include "relu_lift/convex_program.hpp"

#include <map>

namespace relu_lift {

inline constexpr double kScaledTol = 1e-8;
inline constexpr double kColinearTol = 1e-8;

/// ||u|| = |alpha| for every neuron, within 1e-8 (1 + ||u||).
inline bool is_scaled(const NeuralNet& net) {
  for (const auto& nr : net.neurons) {
    const double un = nr.u.norm();
    if (std::abs(un - std::abs(nr.alpha)) > kScaledTol * (1.0 + un)) return false;
  }
  return true;
}

inline bool positively_colinear(const VectorXd& a, const VectorXd& b, double tol = kColinearTol) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return true;
  return (a / na - b / nb).norm() <= tol;
}

/// Nonzero neurons grouped by their cone B(u, alpha).
inline std::map<ConeId, std::vector<std::size_t>> group_by_cone(const Arrangement& arr, const NeuralNet& net) {
  std::map<ConeId, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& nr = net.neurons[i];
    if (auto b = classify_neuron(arr, nr.u, nr.alpha)) groups[*b].push_back(i);
  }
  return groups;
}

/// Scaled, with at most one nonzero neuron per cone B.
inline bool is_minimal(const Arrangement& arr, const NeuralNet& net) {
  if (!is_scaled(net)) return false;
  for (const auto& [cone, members] : group_by_cone(arr, net))
    if (members.size() > 1) return false;
  return true;
}

/// Scaled, with same-cone nonzero neurons positively colinear.
inline bool is_nearly_minimal(const Arrangement& arr, const NeuralNet& net, double tol = kColinearTol) {
  if (!is_scaled(net)) return false;
  for (const auto& [cone, members] : group_by_cone(arr, net))
    for (std::size_t k = 1; k < members.size(); ++k)
      if (!positively_colinear(net.neurons[members[0]].u, net.neurons[members[k]].u, tol)) return false;
  return true;
}

/// Block of the convex program a nonzero neuron contributes to: the smallest
/// dichotomy whose cone contains u, on the side given by sign(alpha).
inline int block_of_neuron(const Arrangement& arr, const VectorXd& u, double alpha) {
  const int j = arr.trichotomy_of(u);
  const int i = arr.dichotomy_for_trichotomy(j);
  return alpha > 0 ? i : i + arr.p();
}

/// W(theta): w_i = sum of |alpha_j| u_j over neurons assigned to block i.
inline ConvexPoint nn_to_convex(const Arrangement& arr, const NeuralNet& net, bool require_minimal = false) {
  if (require_minimal && !is_minimal(arr, net))
    throw Error(ErrorCode::not_minimal, "network is not minimal");
  const Eigen::Index d = arr.X().cols();
  ConvexPoint W = ConvexPoint::zeros(arr.dichotomies().size(), d);
  for (const auto& nr : net.neurons) {
    if (nr.u.size() != d) throw Error(ErrorCode::dim_mismatch, "neuron dimension differs from d");
    if (nr.is_zero()) continue;
    const int b = block_of_neuron(arr, nr.u, nr.alpha);
    W.blocks[static_cast<std::size_t>(b - 1)] += std::abs(nr.alpha) * nr.u;
  }
  return W;
}

namespace detail {

inline Neuron neuron_from_block(const VectorXd& s, double side) {
  const double r = std::sqrt(s.norm());
  return Neuron{s / r, side * r};
}

}  // namespace detail

/// theta(W): nonzero blocks are grouped by (trichotomy cone Q_j of the
/// block, side) and each group sum s gives the neuron (s / sqrt||s||,
/// +-sqrt||s||). Zero-padded to m neurons.
inline NeuralNet convex_to_nn(const Arrangement& arr, const ConvexPoint& W, std::size_t m) {
  const int p = arr.p();
  if (W.blocks.size() != static_cast<std::size_t>(2 * p))
    throw Error(ErrorCode::dim_mismatch, "convex point does not match the arrangement");
  std::map<ConeId, VectorXd> groups;
  std::vector<ConeId> order;
  for (std::size_t i = 0; i < W.blocks.size(); ++i) {
    if (!W.block_nonzero(i)) continue;
    const ConeId key{arr.trichotomy_of(W.blocks[i]), static_cast<int>(i) < p ? 1 : -1};
    auto it = groups.find(key);
    if (it == groups.end()) {
      groups.emplace(key, W.blocks[i]);
      order.push_back(key);
    } else {
      it->second += W.blocks[i];
    }
  }
  if (order.size() > m)
    throw Error(ErrorCode::too_few_neurons, std::to_string(order.size()) + " neuron groups but m = " + std::to_string(m));
  NeuralNet net = NeuralNet::zeros(m, arr.X().cols());
  for (std::size_t k = 0; k < order.size(); ++k)
    net.neurons[k] = detail::neuron_from_block(groups[order[k]], order[k].sign);
  return net;
}

/// psi(W): one neuron per nonzero block, zero-padded to m (m = 0 means
/// exactly ||W||_0 neurons).
inline NeuralNet psi(const Arrangement& arr, const ConvexPoint& W, std::size_t m = 0) {
  const int p = arr.p();
  NeuralNet net;
  for (std::size_t i = 0; i < W.blocks.size(); ++i)
    if (W.block_nonzero(i)) net.neurons.push_back(detail::neuron_from_block(W.blocks[i], static_cast<int>(i) < p ? 1.0 : -1.0));
  if (m == 0) return net;
  if (net.size() > m)
    throw Error(ErrorCode::too_few_neurons, std::to_string(net.size()) + " nonzero blocks but m = " + std::to_string(m));
  while (net.size() < m) net.neurons.push_back(Neuron{VectorXd::Zero(arr.X().cols()), 0.0});
  return net;
}

/// Merge groups of a nearly minimal network: each group's first slot holds
/// the merged neuron, the other slots become zero.
struct MergePlan {
  struct Group {
    std::vector<std::size_t> members;
    Neuron merged;
  };
  std::vector<Group> groups;
};

inline MergePlan merge_plan(const Arrangement& arr, const NeuralNet& net) {
  if (!is_nearly_minimal(arr, net)) throw Error(ErrorCode::not_nearly_minimal, "merge needs a nearly minimal network");
  MergePlan plan;
  for (const auto& [cone, members] : group_by_cone(arr, net)) {
    VectorXd s = VectorXd::Zero(arr.X().cols());
    for (auto i : members) s += std::abs(net.neurons[i].alpha) * net.neurons[i].u;
    Neuron merged = detail::neuron_from_block(s, cone.sign);
    plan.groups.push_back({members, std::move(merged)});
  }
  return plan;
}

/// M(theta).
inline NeuralNet merge(const Arrangement& arr, const NeuralNet& net) {
  NeuralNet out = net;
  const Eigen::Index d = arr.X().cols();
  for (auto& nr : out.neurons)
    if (nr.is_zero()) nr = Neuron{VectorXd::Zero(d), 0.0};
  for (const auto& g : merge_plan(arr, net).groups) {
    out.neurons[g.members[0]] = g.merged;
    for (std::size_t k = 1; k < g.members.size(); ++k) out.neurons[g.members[k]] = Neuron{VectorXd::Zero(d), 0.0};
  }
  return out;
}

/// Splitting weights gamma per source neuron (each list sums to 1).
struct SplitSpec {
  std::vector<std::vector<double>> weights;
};

/// Replaces neuron i by the pieces (sqrt(g) u_i, sqrt(g) alpha_i) for g in
/// weights[i]. Neurons beyond weights.size() are kept; target_m > 0 pads
/// with zeros and must accommodate all pieces.
inline NeuralNet split(const NeuralNet& net, const SplitSpec& spec, std::size_t target_m = 0) {
  if (spec.weights.size() > net.size())
    throw Error(ErrorCode::spec_mismatch, "split spec names more neurons than the network has");
  NeuralNet out;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (i >= spec.weights.size()) {
      out.neurons.push_back(net.neurons[i]);
      continue;
    }
    const auto& g = spec.weights[i];
    if (g.empty()) throw Error(ErrorCode::spec_mismatch, "empty weight list for neuron " + std::to_string(i));
    double total = 0.0;
    for (double x : g) {
      if (!(x >= 0.0)) throw Error(ErrorCode::spec_mismatch, "split weights must be nonnegative");
      total += x;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw Error(ErrorCode::spec_mismatch, "split weights for neuron " + std::to_string(i) + " sum to " +
                                                std::to_string(total));
    for (double x : g) out.neurons.push_back(Neuron{std::sqrt(x) * net.neurons[i].u, std::sqrt(x) * net.neurons[i].alpha});
  }
  if (target_m > 0) {
    if (out.size() > target_m)
      throw Error(ErrorCode::spec_mismatch, "split produces " + std::to_string(out.size()) + " neurons, target " +
                                                std::to_string(target_m));
    const Eigen::Index d = net.neurons.empty() ? 0 : net.neurons[0].u.size();
    while (out.size() < target_m) out.neurons.push_back(Neuron{VectorXd::Zero(d), 0.0});
  }
  return out;
}

/// Element of the optimal set: psi(W*) split by spec, then reordered so that
/// output slot k holds piece permutation[k].
inline NeuralNet optimal_set_member(const Arrangement& arr, const ConvexPoint& W_star, const SplitSpec& spec,
                                    const std::vector<std::size_t>& permutation = {}, std::size_t target_m = 0) {
  NeuralNet net = split(psi(arr, W_star), spec, target_m);
  if (permutation.empty()) return net;
  if (permutation.size() != net.size()) throw Error(ErrorCode::spec_mismatch, "permutation length differs from m");
  NeuralNet out;
  std::vector<char> seen(net.size(), 0);
  for (auto k : permutation) {
    if (k >= net.size() || seen[k]) throw Error(ErrorCode::spec_mismatch, "invalid permutation");
    seen[k] = 1;
    out.neurons.push_back(net.neurons[k]);
  }
  return out;
}

}  // namespace relu_lift
