#pragma once

#include "relu_lift/nonconvex.hpp"

#include <tuple>

#include <limits>

namespace relu_lift {

enum class Verdict { global, not_certified };

inline const char* to_string(Verdict v) { return v == Verdict::global ? "global" : "not_certified"; }

struct BlockCertificate {
  int index = 0;  // 1-based block index
  bool nonzero = false;
  double residual = 0.0;         // stationarity residual (zero blocks: excess over beta)
  double dual_norm = 0.0;        // ||zeta||
  double complementarity = 0.0;  // |<zeta, G w>|
  bool pass = false;
  VectorXd duals;                // one entry per inequality row of the block's cone
};

struct Certificate {
  Verdict verdict = Verdict::not_certified;
  double stationarity_gap = 0.0;  // max block residual
  double tolerance = 0.0;
  std::vector<BlockCertificate> per_block;
  // filled by check_global_optimality
  double objective = std::numeric_limits<double>::quiet_NaN();
  double reduced_objective = std::numeric_limits<double>::quiet_NaN();
  double convex_objective = std::numeric_limits<double>::quiet_NaN();
  ConvexPoint point;

  bool global() const { return verdict == Verdict::global; }
};

inline double default_certificate_tol(const ProblemInstance& inst, const VectorXd& prediction) {
  return 1e-6 * (1.0 + loss_gradient(inst, prediction).cwiseAbs().maxCoeff());
}

/// KKT test for a feasible point of a ConeLasso problem; see
/// block_kkt for the per-block residuals.
/// Blocks below 1e-8 (1 + max|w|) count as zero.
inline Certificate cone_lasso_kkt(const ConeLasso& prob, const std::vector<VectorXd>& w, double tol = 0.0) {
  const ProblemInstance& inst = prob.instance();
  if (w.size() != prob.blocks()) throw Error(ErrorCode::dim_mismatch, "point has the wrong number of blocks");
  if (!prob.feasible(w)) throw Error(ErrorCode::infeasible_point, "KKT check needs a feasible point");
  double wmax = 0.0;
  for (const auto& b : w)
    if (b.size()) wmax = std::max(wmax, b.cwiseAbs().maxCoeff());
  std::vector<VectorXd> wz = w;
  for (auto& b : wz)
    if (b.norm() <= 1e-8 * (1.0 + wmax)) b.setZero();
  const VectorXd v = prob.prediction(wz);
  const VectorXd lam = loss_gradient(inst, v);
  Certificate cert;
  cert.tolerance = tol > 0.0 ? tol : default_certificate_tol(inst, v);
  cert.per_block.resize(w.size());
  parallel_for(w.size(), [&](std::size_t i) {
    const MatrixXd& G = prob.cone(i).inequalities();
    BlockCertificate bc;
    bc.index = static_cast<int>(i) + 1;
    bc.nonzero = wz[i].squaredNorm() > 0.0;
    std::tie(bc.residual, bc.duals) = block_kkt(prob, i, wz[i], lam);
    bc.dual_norm = bc.duals.norm();
    bc.complementarity = std::abs(bc.duals.dot(G * wz[i]));
    bc.pass = bc.residual <= cert.tolerance && bc.complementarity <= cert.tolerance;
    cert.per_block[i] = std::move(bc);
  });
  bool all = true;
  for (const auto& bc : cert.per_block) {
    cert.stationarity_gap = std::max(cert.stationarity_gap, bc.residual);
    all = all && bc.pass;
  }
  cert.verdict = all ? Verdict::global : Verdict::not_certified;
  return cert;
}

/// KKT certificate for a point of the dichotomy program.
inline Certificate kkt_check(const ProblemInstance& inst, const std::vector<Dichotomy>& dichotomies,
                             const ConvexPoint& W, double tol = 0.0) {
  check_point(inst, dichotomies, W);
  if (!is_feasible(inst, dichotomies, W))
    throw Error(ErrorCode::infeasible_point, "a block violates its cone constraint");
  const ConeLasso prob = dichotomy_problem(inst, dichotomies);
  Certificate cert = cone_lasso_kkt(prob, W.blocks, tol);
  cert.convex_objective = objective_c(inst, dichotomies, W);
  cert.point = W;
  return cert;
}

/// Global-optimality test for a network: scale, align, merge, map to the
/// convex program, and run the KKT check. The verdict is global only when
/// the reduced point is KKT-optimal and the network itself attains the
/// reduced objective (reduction never increases it, so a gap means the
/// input was suboptimal).
inline Certificate check_global_optimality(const ProblemInstance& inst, const Arrangement& arr, const NeuralNet& net,
                                           double tol = 0.0) {
  check_dims(inst, net);
  const NeuralNet reduced = merge(arr, align_neurons(arr, scale_neurons(net)));
  const ConvexPoint W = nn_to_convex(arr, reduced);
  Certificate cert = kkt_check(inst, arr.dichotomies(), W, tol);
  cert.objective = objective_nc(inst, net);
  cert.reduced_objective = objective_nc(inst, reduced);
  const double match_tol = 1e-9 * (1.0 + std::abs(cert.reduced_objective));
  if (cert.objective > cert.reduced_objective + match_tol) cert.verdict = Verdict::not_certified;
  return cert;
}

struct SubsampledGap {
  double gap = 0.0;                    // subsampled optimum - full trichotomy optimum
  std::vector<int> active_set;         // trichotomy indices I(theta)
  double subsampled_optimum = 0.0;
  double full_optimum = 0.0;
  double network_objective = 0.0;
  double correspondence = 0.0;         // |objective_nc(theta) - subsampled optimum|
  double clarke = 0.0;
};

/// A Clarke-stationary network is optimal for the trichotomy
/// program restricted to the cones it occupies.
inline SubsampledGap subsampled_gap(const ProblemInstance& inst, const Arrangement& arr, const NeuralNet& net,
                                    double stationarity_threshold = 1e-4, const SolverOptions& opts = {}) {
  SubsampledGap out;
  out.clarke = clarke_residual(inst, net).residual_norm;
  if (out.clarke > stationarity_threshold)
    throw Error(ErrorCode::not_stationary, "Clarke residual " + std::to_string(out.clarke) + " exceeds " +
                                               std::to_string(stationarity_threshold));
  // neurons whose contribution |alpha| u is below the block cutoff of the
  // convex side count as zero
  double mass = 0.0;
  for (const auto& nr : net.neurons) mass = std::max(mass, std::abs(nr.alpha) * nr.u.norm());
  for (const auto& nr : net.neurons)
    if (!nr.is_zero() && std::abs(nr.alpha) * nr.u.norm() > 1e-8 * (1.0 + mass))
      out.active_set.push_back(arr.trichotomy_of(nr.u));
  std::sort(out.active_set.begin(), out.active_set.end());
  out.active_set.erase(std::unique(out.active_set.begin(), out.active_set.end()), out.active_set.end());
  out.subsampled_optimum = solve_trichotomy_program(inst, arr.trichotomies(), out.active_set, opts).objective;
  out.full_optimum = solve_trichotomy_program(inst, arr.trichotomies(), std::nullopt, opts).objective;
  out.gap = out.subsampled_optimum - out.full_optimum;
  out.network_objective = objective_nc(inst, net);
  out.correspondence = std::abs(out.network_objective - out.subsampled_optimum);
  return out;
}

struct UniquenessOptions {
  double slack = 1e-12;
  int max_bisection = 60;
  SolverOptions solver;
};

struct UniquenessReport {
  std::vector<double> lower, upper;  // p^lb_j, p^ub_j over the stacked coordinates (block-major)
  std::vector<char> known;           // 0 where a subproblem could not be solved
  double radius_inf = 0.0;
  bool unique = false;
  double epsilon = 0.0;
};

namespace detail {

struct DirectionalBound {
  double feasible = 0.0;  // best dir * x_j attained inside the sublevel set
  double bound = 0.0;     // certified bound on dir * x_j over the sublevel set
  bool ok = true;
};

// Lagrangian bisection for sup { dir * x_j : F(x) <= level }. For lambda > 0,
// x(lambda) = argmin F(x) - lambda dir x_j gives the weak-duality bound
//   dir * x_j(lambda) + (level - F(x(lambda))) / lambda.
inline DirectionalBound directional_bound(ConeLasso prob, const std::vector<VectorXd>& x_star, std::size_t block,
                                          Eigen::Index comp, double dir, double level, double resolution,
                                          const UniquenessOptions& opts) {
  const ProblemInstance& inst = prob.instance();
  const Eigen::Index d = prob.d();
  auto F = [&](const std::vector<VectorXd>& x) {
    double f = loss_value(inst, prob.prediction(x));
    for (const auto& b : x) f += inst.beta * b.norm();
    return f;
  };
  DirectionalBound out;
  out.feasible = dir * x_star[block][comp];
  out.bound = std::numeric_limits<double>::infinity();
  std::vector<VectorXd> warm = x_star;

  auto evaluate = [&](double lambda, std::vector<VectorXd>& x) -> bool {
    std::vector<VectorXd> c(prob.blocks(), VectorXd::Zero(d));
    c[block][comp] = -dir * lambda;
    prob.set_linear(std::move(c));
    const double ktol = 1e-9 * (1.0 + lambda);
    std::vector<VectorXd> cand = warm;
    if (auto p = polish(prob, cand)) cand = std::move(*p);
    if (cone_lasso_kkt(prob, cand, ktol).global()) {
      x = std::move(cand);
      return true;
    }
    auto [sol, stats] = solve_cone_lasso(prob, opts.solver, &warm);
    if (cone_lasso_kkt(prob, sol, ktol).global()) {
      x = std::move(sol);
      return true;
    }
    return false;
  };

  auto record = [&](double lambda, const std::vector<VectorXd>& x) {
    const double fx = F(x);
    const double xj = dir * x[block][comp];
    out.bound = std::min(out.bound, xj + (level - fx) / lambda);
    if (fx <= level) out.feasible = std::max(out.feasible, xj);
    return fx <= level;
  };

  double lo = 0.0, hi = 0.0;
  double lambda = 1e-4;
  std::vector<VectorXd> x;
  // bracket
  for (int k = 0; k < 40; ++k) {
    if (!evaluate(lambda, x)) break;  // keep the bounds certified so far
    const bool inside = record(lambda, x);
    if (inside) {
      lo = lambda;
      warm = x;
      if (hi > 0.0 || lambda > 1e8) break;
      lambda *= 10.0;
    } else {
      hi = lambda;
      if (lo > 0.0 || lambda < 1e-16) break;
      lambda /= 10.0;
    }
    if (out.bound - out.feasible <= resolution) return out;
  }
  if (lo > 0.0 && hi > 0.0) {
    for (int k = 0; k < opts.max_bisection && out.bound - out.feasible > resolution; ++k) {
      const double mid = std::sqrt(lo * hi);
      if (!evaluate(mid, x)) break;
      if (record(mid, x)) {
        lo = mid;
        warm = x;
      } else {
        hi = mid;
      }
    }
  }
  if (!std::isfinite(out.bound)) out.ok = false;
  return out;
}

}  // namespace detail

/// Coordinate-wise bounds on the set {feasible W : objective <= f* + slack}.
/// `x_star` is a known optimal point (solved here if omitted).
inline UniquenessReport verify_unique_optimum(const ProblemInstance& inst, const std::vector<Dichotomy>& dichotomies,
                                              double f_star, double epsilon, const UniquenessOptions& opts = {},
                                              std::optional<ConvexPoint> x_star = std::nullopt) {
  const ConeLasso prob = dichotomy_problem(inst, dichotomies);
  if (!x_star) x_star = solve_dichotomy_program(inst, dichotomies, opts.solver).point;
  const double level = f_star + opts.slack;
  const std::size_t B = prob.blocks();
  const Eigen::Index d = prob.d();
  const std::size_t total = B * static_cast<std::size_t>(d);
  UniquenessReport rep;
  rep.epsilon = epsilon;
  rep.lower.assign(total, 0.0);
  rep.upper.assign(total, 0.0);
  rep.known.assign(total, 1);
  const double resolution = std::max(1e-3 * epsilon, 1e-14);
  parallel_for(2 * total, [&](std::size_t task) {
    const std::size_t j = task / 2;
    const double dir = task % 2 == 0 ? 1.0 : -1.0;
    const auto b = detail::directional_bound(prob, x_star->blocks, j / static_cast<std::size_t>(d),
                                             static_cast<Eigen::Index>(j % static_cast<std::size_t>(d)), dir, level,
                                             resolution, opts);
    if (dir > 0) rep.upper[j] = b.bound;
    else rep.lower[j] = -b.bound;
    if (!b.ok) rep.known[j] = 0;
  });
  rep.radius_inf = 0.0;
  bool all_known = true;
  for (std::size_t j = 0; j < total; ++j) {
    if (!rep.known[j]) {
      all_known = false;
      rep.radius_inf = std::numeric_limits<double>::infinity();
      continue;
    }
    rep.radius_inf = std::max(rep.radius_inf, rep.upper[j] - rep.lower[j]);
  }
  rep.unique = all_known && rep.radius_inf <= epsilon;
  return rep;
}

}  // namespace relu_lift
