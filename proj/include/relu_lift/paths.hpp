#pragma once

#include "relu_lift/nonconvex.hpp"

#include <functional>

namespace relu_lift {

enum class Monotonicity { constant, non_increasing, strictly_decreasing };

inline const char* to_string(Monotonicity m) {
  switch (m) {
    case Monotonicity::constant: return "constant";
    case Monotonicity::non_increasing: return "non_increasing";
    case Monotonicity::strictly_decreasing: return "strictly_decreasing";
  }
  return "?";
}

struct PathSegment {
  double t0 = 0.0, t1 = 1.0;
  std::string formula;
  Monotonicity claim = Monotonicity::constant;
  std::function<NeuralNet(double)> eval;  // local parameter s in [0, 1]
};

/// Piecewise closed-form path t in [0,1] -> network.
class Path {
 public:
  Path() = default;

  static Path constant(const NeuralNet& net) {
    Path p;
    p.segments_.push_back({0.0, 1.0, "identity", Monotonicity::constant, [net](double) { return net; }});
    return p;
  }

  static Path single(std::string formula, Monotonicity claim, std::function<NeuralNet(double)> eval) {
    Path p;
    p.segments_.push_back({0.0, 1.0, std::move(formula), claim, std::move(eval)});
    return p;
  }

  /// Runs the paths one after another, each over an equal share of [0,1].
  static Path concat(const std::vector<Path>& parts) {
    if (parts.empty()) throw Error(ErrorCode::invalid_instance, "cannot concatenate zero paths");
    Path out;
    const double share = 1.0 / static_cast<double>(parts.size());
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const double base = share * static_cast<double>(k);
      for (const auto& s : parts[k].segments_) {
        PathSegment seg = s;
        seg.t0 = base + share * s.t0;
        seg.t1 = k + 1 == parts.size() && s.t1 == 1.0 ? 1.0 : base + share * s.t1;
        out.segments_.push_back(std::move(seg));
      }
    }
    return out;
  }

  NeuralNet evaluate(double t) const {
    if (segments_.empty()) throw Error(ErrorCode::invalid_instance, "empty path");
    t = std::clamp(t, 0.0, 1.0);
    for (const auto& s : segments_)
      if (t <= s.t1 || &s == &segments_.back()) return s.eval(s.t1 > s.t0 ? (t - s.t0) / (s.t1 - s.t0) : 1.0);
    return segments_.back().eval(1.0);
  }

  NeuralNet start() const { return evaluate(0.0); }
  NeuralNet end() const { return evaluate(1.0); }
  const std::vector<PathSegment>& segments() const { return segments_; }

  Monotonicity claim() const {
    bool any = false;
    for (const auto& s : segments_)
      if (s.claim != Monotonicity::constant) any = true;
    if (!any) return Monotonicity::constant;
    if (segments_.size() == 1) return segments_[0].claim;
    return Monotonicity::non_increasing;
  }

 private:
  std::vector<PathSegment> segments_;
};

struct PathCheck {
  std::vector<double> t;
  std::vector<double> objective;
  double max_increase = 0.0;  // largest rise between consecutive samples
  double spread = 0.0;        // max - min over the grid
  bool pass = true;
  std::string message;
};

/// Samples the objective on a uniform grid (plus segment endpoints) and
/// tests every segment's claim with the given slack, scaled by 1 + |f|.
inline PathCheck check_path(const ProblemInstance& inst, const Path& path, int points = 101, double slack = 1e-9) {
  PathCheck out;
  for (int k = 0; k < points; ++k) out.t.push_back(points > 1 ? static_cast<double>(k) / (points - 1) : 0.0);
  for (const auto& s : path.segments()) {
    out.t.push_back(s.t0);
    out.t.push_back(s.t1);
  }
  std::sort(out.t.begin(), out.t.end());
  out.t.erase(std::unique(out.t.begin(), out.t.end()), out.t.end());
  out.objective.resize(out.t.size());
  parallel_for(out.t.size(), [&](std::size_t k) { out.objective[k] = objective_nc(inst, path.evaluate(out.t[k])); });
  const auto [lo, hi] = std::minmax_element(out.objective.begin(), out.objective.end());
  out.spread = *hi - *lo;
  const double scale = 1.0 + std::abs(*hi);
  for (std::size_t k = 1; k < out.t.size(); ++k)
    out.max_increase = std::max(out.max_increase, out.objective[k] - out.objective[k - 1]);
  auto fail = [&](const std::string& msg) {
    if (out.pass) out.message = msg;
    out.pass = false;
  };
  for (std::size_t si = 0; si < path.segments().size(); ++si) {
    const auto& s = path.segments()[si];
    double f0 = 0, f1 = 0, smin = INFINITY, smax = -INFINITY, rise = 0.0, prev = NAN;
    for (std::size_t k = 0; k < out.t.size(); ++k) {
      if (out.t[k] < s.t0 || out.t[k] > s.t1) continue;
      const double f = out.objective[k];
      if (out.t[k] == s.t0) f0 = f;
      if (out.t[k] == s.t1) f1 = f;
      smin = std::min(smin, f);
      smax = std::max(smax, f);
      if (!std::isnan(prev)) rise = std::max(rise, f - prev);
      prev = f;
    }
    const std::string name = "segment " + std::to_string(si) + " (" + s.formula + ")";
    switch (s.claim) {
      case Monotonicity::constant:
        if (smax - smin > slack * scale) fail(name + " is not constant: spread " + std::to_string(smax - smin));
        break;
      case Monotonicity::strictly_decreasing:
        if (!(f1 < f0)) fail(name + " does not decrease");
        [[fallthrough]];
      case Monotonicity::non_increasing:
        if (rise > slack * scale) fail(name + " increases by " + std::to_string(rise));
        break;
    }
  }
  return out;
}

namespace detail {

/// Decreases smaller than this cannot be told apart from roundoff, so the
/// corresponding segment only claims non-increase.
inline double resolvable_decrease(double f) { return 1e-9 * (1.0 + std::abs(f)); }

/// (1-t) a + t b rescaled to a scaled neuron with the given sign.
inline Neuron colinear_blend(const VectorXd& a, const VectorXd& b, double t, double sign) {
  const VectorXd v = (1.0 - t) * a + t * b;
  const double r = std::sqrt(v.norm());
  if (r == 0.0) return Neuron{VectorXd::Zero(v.size()), 0.0};
  return Neuron{v / r, sign * r};
}

inline Neuron shrink(const Neuron& nr, double t) {
  const double c = std::sqrt(std::max(0.0, 1.0 - t));
  return Neuron{c * nr.u, c * nr.alpha};
}

}  // namespace detail

/// Constant-objective path from a nearly minimal network to its merge.
inline Path path_merge(const ProblemInstance& inst, const Arrangement& arr, const NeuralNet& net) {
  check_dims(inst, net);
  const MergePlan plan = merge_plan(arr, net);
  bool trivial = true;
  for (const auto& g : plan.groups)
    if (g.members.size() > 1) trivial = false;
  if (trivial) return Path::constant(net);
  return Path::single("merge", Monotonicity::constant, [net, plan](double t) {
    NeuralNet out = net;
    for (const auto& g : plan.groups) {
      if (g.members.size() < 2) continue;
      const Neuron& first = net.neurons[g.members[0]];
      out.neurons[g.members[0]] = detail::colinear_blend(std::abs(first.alpha) * first.u,
                                                         std::abs(g.merged.alpha) * g.merged.u, t,
                                                         sign_of(g.merged.alpha));
      for (std::size_t k = 1; k < g.members.size(); ++k)
        out.neurons[g.members[k]] = detail::shrink(net.neurons[g.members[k]], t);
    }
    return out;
  });
}

/// Two segments: rescaling every neuron to ||u|| = |alpha| (constant
/// predictions, regularizer decreasing), then aligning non-colinear
/// same-cone neurons to the average of their cone. A segment whose property
/// already holds is the identity.
inline Path path_to_nearly_minimal(const ProblemInstance& inst, const Arrangement& arr, const NeuralNet& net) {
  check_dims(inst, net);
  const double f0 = objective_nc(inst, net);

  // Part 1: scaling.
  Path part1;
  NeuralNet scaled = net;
  if (is_scaled(net)) {
    part1 = Path::constant(net);
  } else {
    double drop = 0.0;
    for (const auto& nr : net.neurons) {
      const double d = nr.u.norm() - std::abs(nr.alpha);
      drop += 0.5 * inst.beta * d * d;
    }
    part1 = Path::single("scale", drop > detail::resolvable_decrease(f0) ? Monotonicity::strictly_decreasing
                                                                          : Monotonicity::non_increasing,
                         [net](double t) {
                           NeuralNet out = net;
                           for (auto& nr : out.neurons) {
                             const double un = nr.u.norm(), an = std::abs(nr.alpha);
                             if (un > 0.0 && an > 0.0) {
                               const double ra = std::sqrt(an);
                               const double g = ra + t * (std::sqrt(un) - ra);
                               nr.u *= ra / g;
                               nr.alpha *= g / ra;
                             } else {
                               // one factor vanishes: shrink the other linearly
                               nr.u *= 1.0 - t;
                               nr.alpha *= 1.0 - t;
                             }
                           }
                           return out;
                         });
    scaled = part1.end();
  }

  // Part 2: alignment, only on cones whose neurons are not colinear.
  struct Group {
    std::vector<std::size_t> members;
    VectorXd w;
    double sign;
  };
  std::vector<Group> groups;
  double drop = 0.0;
  for (const auto& [cone, members] : group_by_cone(arr, scaled)) {
    bool colinear = true;
    for (std::size_t k = 1; k < members.size() && colinear; ++k)
      colinear = positively_colinear(scaled.neurons[members[0]].u, scaled.neurons[members[k]].u);
    if (colinear) continue;
    Group g{members, VectorXd::Zero(inst.d()), static_cast<double>(cone.sign)};
    double mass = 0.0;
    for (auto i : members) {
      g.w += std::abs(scaled.neurons[i].alpha) * scaled.neurons[i].u;
      mass += std::abs(scaled.neurons[i].alpha) * scaled.neurons[i].u.norm();
    }
    drop += inst.beta * (mass - g.w.norm());
    groups.push_back(std::move(g));
  }
  Path part2;
  if (groups.empty()) {
    part2 = Path::constant(scaled);
  } else {
    const double f1 = objective_nc(inst, scaled);
    part2 = Path::single("align", drop > detail::resolvable_decrease(f1) ? Monotonicity::strictly_decreasing
                                                                          : Monotonicity::non_increasing,
                         [scaled, groups](double t) {
                           NeuralNet out = scaled;
                           for (const auto& g : groups) {
                             const VectorXd share = g.w / static_cast<double>(g.members.size());
                             for (auto i : g.members) {
                               const Neuron& nr = scaled.neurons[i];
                               out.neurons[i] = detail::colinear_blend(std::abs(nr.alpha) * nr.u, share, t, g.sign);
                             }
                           }
                           return out;
                         });
  }
  if (part1.claim() == Monotonicity::constant && part2.claim() == Monotonicity::constant) return Path::constant(net);
  return Path::concat({part1, part2});
}

struct Reduction {
  NeuralNet net;  // same slots as the input; removed neurons are zero
  Path path;      // constant objective
};

namespace detail {

/// Carathéodory elimination on the weights mu_i = ||u_i|| |alpha_i| of the
/// points z_i = sign(alpha_i) relu(X u_i / ||u_i||): while more than n+1
/// points carry weight, move along an affine dependence until one weight
/// hits zero (minimum-ratio step). Returns the new weights.
inline VectorXd caratheodory_weights(const MatrixXd& X, const NeuralNet& net) {
  const Eigen::Index n = X.rows();
  const auto m = static_cast<Eigen::Index>(net.size());
  VectorXd mu = VectorXd::Zero(m);
  MatrixXd Z = MatrixXd::Zero(n + 1, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Neuron& nr = net.neurons[static_cast<std::size_t>(i)];
    if (nr.is_zero()) continue;
    const double un = nr.u.norm();
    mu[i] = un * std::abs(nr.alpha);
    Z.col(i).head(n) = sign_of(nr.alpha) * relu(X * (nr.u / un));
    Z(n, i) = 1.0;
  }
  while (true) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < m; ++i)
      if (mu[i] > 0.0) active.push_back(i);
    if (static_cast<Eigen::Index>(active.size()) <= n + 1) break;
    MatrixXd A(n + 1, static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) A.col(static_cast<Eigen::Index>(k)) = Z.col(active[k]);
    Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeFullV);
    VectorXd c = svd.matrixV().col(A.cols() - 1);
    if (c.maxCoeff() <= 0.0) c = -c;
    double tau = INFINITY;
    std::size_t pivot = 0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double ck = c[static_cast<Eigen::Index>(k)];
      if (ck <= 0.0) continue;
      const double ratio = mu[active[k]] / ck;
      if (ratio < tau) {
        tau = ratio;
        pivot = k;
      }
    }
    for (std::size_t k = 0; k < active.size(); ++k)
      mu[active[k]] = std::max(0.0, mu[active[k]] - tau * c[static_cast<Eigen::Index>(k)]);
    mu[active[pivot]] = 0.0;
  }
  return mu;
}

}  // namespace detail

/// At most n+1 nonzero neurons with the same predictions and regularizer,
/// joined to the input by a constant-objective path: kept neurons are
/// rescaled along their own ray, removed ones shrink as sqrt(1-t).
inline Reduction caratheodory_reduce(const ProblemInstance& inst, const NeuralNet& net) {
  check_dims(inst, net);
  if (!is_scaled(net)) throw Error(ErrorCode::not_scaled, "caratheodory_reduce needs a scaled network");
  if (static_cast<Eigen::Index>(net.size()) < inst.n() + 1)
    throw Error(ErrorCode::too_few_neurons, "caratheodory_reduce needs m >= n+1 = " + std::to_string(inst.n() + 1));
  const VectorXd mu_new = detail::caratheodory_weights(inst.X, net);
  std::vector<double> factor(net.size(), 1.0);
  bool identity = true;
  Reduction out;
  out.net = net;
  for (std::size_t i = 0; i < net.size(); ++i) {
    Neuron& nr = out.net.neurons[i];
    if (nr.is_zero()) continue;
    const double mu = nr.u.norm() * std::abs(nr.alpha);
    const double target = mu_new[static_cast<Eigen::Index>(i)];
    factor[i] = target / mu;
    if (factor[i] != 1.0) identity = false;
    const double c = std::sqrt(factor[i]);
    nr.u *= c;
    nr.alpha *= c;
    if (target == 0.0) nr = Neuron{VectorXd::Zero(inst.d()), 0.0};
  }
  if (identity) {
    out.path = Path::constant(net);
    return out;
  }
  // ||u_i(t)|| |alpha_i(t)| = (1-t) mu_i + t mu_i' keeps both the
  // predictions and the regularizer affine in t, hence constant.
  out.path = Path::single("caratheodory", Monotonicity::constant, [net, factor](double t) {
    NeuralNet o = net;
    for (std::size_t i = 0; i < net.size(); ++i) {
      const double c = std::sqrt(std::max(0.0, (1.0 - t) + t * factor[i]));
      o.neurons[i].u *= c;
      o.neurons[i].alpha *= c;
    }
    return o;
  });
  return out;
}

namespace detail {

/// theta(t) = sqrt(1-t) a + sqrt(t) b on disjoint slots: nonzero neurons of
/// b go to the zero slots of a, lowest index first. Returns the slot of
/// every nonzero neuron of b.
inline std::vector<std::size_t> assign_slots(const NeuralNet& a, const NeuralNet& b) {
  std::vector<std::size_t> free, slots;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.neurons[i].is_zero()) free.push_back(i);
  std::size_t next = 0;
  for (const auto& nr : b.neurons) {
    if (nr.is_zero()) continue;
    if (next == free.size())
      throw Error(ErrorCode::too_few_neurons, "not enough zero slots: " + std::to_string(free.size()) + " free, " +
                                                  std::to_string(b.nonzero_count()) + " needed");
    slots.push_back(free[next++]);
  }
  return slots;
}

inline NeuralNet blend(const NeuralNet& a, const NeuralNet& b, const std::vector<std::size_t>& slots, double t) {
  const Eigen::Index d = a.neurons.empty() ? 0 : a.neurons[0].u.size();
  NeuralNet out;
  for (const auto& nr : a.neurons)
    out.neurons.push_back(nr.is_zero() ? Neuron{VectorXd::Zero(d), 0.0} : shrink(nr, t));
  const double c = std::sqrt(std::clamp(t, 0.0, 1.0));
  std::size_t k = 0;
  for (const auto& nr : b.neurons) {
    if (nr.is_zero()) continue;
    out.neurons[slots[k++]] = Neuron{c * nr.u, c * nr.alpha};
  }
  return out;
}

}  // namespace detail

/// theta -> (scaling, alignment) -> Carathéodory reduction -> convex blend
/// into theta_star. Needs m >= n + 1 + m*, where m* is the number of
/// nonzero neurons of theta_star. The last segment is non-increasing only if
/// theta_star is a global minimizer.
inline Path path_to_global(const ProblemInstance& inst, const Arrangement& arr, const NeuralNet& net,
                           const NeuralNet& theta_star) {
  check_dims(inst, net);
  check_dims(inst, theta_star);
  const std::size_t m_star = theta_star.nonzero_count();
  const std::size_t need = static_cast<std::size_t>(inst.n()) + 1 + m_star;
  if (net.size() < need)
    throw Error(ErrorCode::too_few_neurons,
                "path_to_global needs m >= n+1+m* = " + std::to_string(need) + ", got " + std::to_string(net.size()));
  const Path first = path_to_nearly_minimal(inst, arr, net);
  const Reduction red = caratheodory_reduce(inst, first.end());
  const auto slots = detail::assign_slots(red.net, theta_star);
  const NeuralNet start = red.net;
  const Path last = Path::single("blend", Monotonicity::non_increasing, [start, theta_star, slots](double t) {
    return detail::blend(start, theta_star, slots, t);
  });
  return Path::concat({first, red.path, last});
}

/// Network whose predictions are lam * yhat(r0) + (1 - lam) * yhat(r1),
/// where r0, r1 are the scaled Carathéodory reductions of theta0, theta1,
/// built on disjoint slots of an m-neuron network (m >= 2(n+1)).
inline NeuralNet interpolate_realization(const ProblemInstance& inst, const NeuralNet& theta0, const NeuralNet& theta1,
                                         double lam, std::size_t m) {
  check_dims(inst, theta0);
  check_dims(inst, theta1);
  if (!(lam >= 0.0 && lam <= 1.0)) throw Error(ErrorCode::invalid_instance, "lambda must lie in [0, 1]");
  const auto cap = static_cast<std::size_t>(inst.n()) + 1;
  if (m < 2 * cap)
    throw Error(ErrorCode::too_few_neurons, "interpolation needs m >= 2(n+1) = " + std::to_string(2 * cap));
  auto reduce = [&](const NeuralNet& th) {
    NeuralNet s = scale_neurons(th);
    if (s.size() < cap) return s;
    return caratheodory_reduce(inst, s).net;
  };
  const NeuralNet r0 = reduce(theta0), r1 = reduce(theta1);
  NeuralNet out = NeuralNet::zeros(m, inst.d());
  std::size_t slot = 0;
  const double c0 = std::sqrt(lam), c1 = std::sqrt(1.0 - lam);
  for (const auto& nr : r0.neurons)
    if (!nr.is_zero()) out.neurons[slot++] = Neuron{c0 * nr.u, c0 * nr.alpha};
  for (const auto& nr : r1.neurons)
    if (!nr.is_zero()) out.neurons[slot++] = Neuron{c1 * nr.u, c1 * nr.alpha};
  return out;
}

}  // namespace relu_lift
