#pragma once

#include "relu_lift/arrangement.hpp"
#include "relu_lift/cone.hpp"

#include <limits>
#include <memory>
#include <optional>

namespace relu_lift {

/// Blocks (w_1, ..., w_2p) of the dichotomy program; block i + p pairs with
/// the negated diagonal -D_i.
struct ConvexPoint {
  std::vector<VectorXd> blocks;

  static ConvexPoint zeros(std::size_t count, Eigen::Index d) {
    return ConvexPoint{std::vector<VectorXd>(count, VectorXd::Zero(d))};
  }
  double max_abs() const {
    double m = 0.0;
    for (const auto& b : blocks)
      if (b.size()) m = std::max(m, b.cwiseAbs().maxCoeff());
    return m;
  }
  bool block_nonzero(std::size_t i) const { return blocks[i].norm() > 1e-8 * (1.0 + max_abs()); }
  /// ||W||_0 with the 1e-8 (1 + ||W||_max) cutoff.
  std::size_t nonzero_count() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) c += block_nonzero(i);
    return c;
  }
};

/// Variables of the (subsampled) trichotomy program. `subset` lists the
/// 1-based trichotomy indices kept; blocks[k] is the positive side of
/// subset[k] and blocks[k + |subset|] the negative side.
struct TriConvexPoint {
  std::vector<int> subset;
  std::vector<VectorXd> blocks;
};

struct SolverOptions {
  double tol = 0.0;  // 0 selects 1e-6 sqrt(#blocks * d)
  int max_iter = 200000;
  double rho = 1.0;
  double relaxation = 1.5;
  bool polish = true;
};

struct SolveStats {
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool polished = false;
  double tol = 0.0;
};

template <class Point>
struct BasicSolveReport : SolveStats {
  Point point;

  const BasicSolveReport& require_converged() const {
    if (!converged)
      throw Error(ErrorCode::max_iter_exceeded, "solver stopped after " + std::to_string(iterations) +
                                                    " iterations with residuals " + std::to_string(primal_residual) +
                                                    ", " + std::to_string(dual_residual));
    return *this;
  }
};

using SolveReport = BasicSolveReport<ConvexPoint>;
using TriSolveReport = BasicSolveReport<TriConvexPoint>;

/// min l(sum_i M_i w_i) + beta sum_i ||w_i|| + c'w  s.t.  w_i in K_i.
///
/// Both convex programs are instances: M_i = +-D_i X (dichotomies) or
/// +-T_j X (trichotomies). The optional linear term c is used by the
/// uniqueness bounds.
class ConeLasso {
 public:
  ConeLasso(const ProblemInstance& inst, std::vector<MatrixXd> maps,
            std::vector<std::shared_ptr<const PolyhedralCone>> cones)
      : inst_(&inst), maps_(std::move(maps)), cones_(std::move(cones)) {
    if (maps_.size() != cones_.size()) throw Error(ErrorCode::dim_mismatch, "one cone per block required");
  }

  const ProblemInstance& instance() const { return *inst_; }
  std::size_t blocks() const { return maps_.size(); }
  Eigen::Index d() const { return inst_->d(); }
  const MatrixXd& map(std::size_t i) const { return maps_[i]; }
  const PolyhedralCone& cone(std::size_t i) const { return *cones_[i]; }

  /// Linear term as one vector per block; empty means none.
  void set_linear(std::vector<VectorXd> c) { linear_ = std::move(c); }
  const std::vector<VectorXd>& linear() const { return linear_; }

  VectorXd prediction(const std::vector<VectorXd>& w) const {
    VectorXd v = VectorXd::Zero(inst_->n());
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i].squaredNorm() > 0.0) v += maps_[i] * w[i];
    return v;
  }

  double objective(const std::vector<VectorXd>& w) const {
    double f = loss_value(*inst_, prediction(w));
    for (std::size_t i = 0; i < w.size(); ++i) {
      f += inst_->beta * w[i].norm();
      if (!linear_.empty()) f += linear_[i].dot(w[i]);
    }
    return f;
  }

  bool feasible(const std::vector<VectorXd>& w, double rel_tol = 1e-10) const {
    for (std::size_t i = 0; i < w.size(); ++i)
      if (!cones_[i]->contains(w[i], rel_tol)) return false;
    return true;
  }

 private:
  const ProblemInstance* inst_;
  std::vector<MatrixXd> maps_;
  std::vector<std::shared_ptr<const PolyhedralCone>> cones_;
  std::vector<VectorXd> linear_;
};

namespace detail {

/// argmin_v l(sigma v) + rho/2 ||v - a||^2, coordinatewise.
inline VectorXd loss_prox(const ProblemInstance& inst, const VectorXd& a, double sigma, double rho) {
  if (inst.loss == LossKind::squared) {
    const double w2 = 2.0 * inst.squared_weight;
    return (w2 * sigma * inst.y + rho * a) / (w2 * sigma * sigma + rho);
  }
  VectorXd v(a.size());
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double ys = inst.y[k] * sigma;
    auto sig = [](double z) { return z > 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); };
    auto dphi = [&](double x) { return -ys * sig(-ys * x) + rho * (x - a[k]); };
    double lo = a[k] - std::abs(ys) / rho, hi = a[k] + std::abs(ys) / rho;
    double x = a[k];
    for (int it = 0; it < 100; ++it) {
      const double g = dphi(x);
      if (g > 0) hi = x; else lo = x;
      if (std::abs(g) <= 1e-15 * (1.0 + std::abs(ys)) || hi - lo <= 1e-16 * (1.0 + std::abs(x))) break;
      const double s = sig(-ys * x);
      double next = x - g / (ys * ys * s * (1.0 - s) + rho);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      x = next;
    }
    v[k] = x;
  }
  return v;
}

inline MatrixXd null_basis(const MatrixXd& rows, Eigen::Index d) {
  if (rows.rows() == 0) return MatrixXd::Identity(d, d);
  Eigen::JacobiSVD<MatrixXd> svd(rows, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double thresh = 1e-10 * std::max(1.0, s.size() ? s[0] : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s[k] > thresh) ++rank;
  return svd.matrixV().rightCols(d - rank);
}

}  // namespace detail

/// KKT residual of block i at w given the loss gradient lam.
/// Nonzero block: NNLS fit of duals on the tight rows,
///   min_{zeta >= 0} || N'(g + beta w/||w|| - G_A' zeta) ||,
/// where g is the smooth gradient and N spans the equality subspace.
/// Zero block: max(0, min_{zeta >= 0} || N'(g - G' zeta) || - beta).
inline std::pair<double, VectorXd> block_kkt(const ConeLasso& prob, std::size_t i, const VectorXd& wi,
                                             const VectorXd& lam) {
  const auto& cone = prob.cone(i);
  const MatrixXd& G = cone.inequalities();
  const MatrixXd& N = cone.basis();
  VectorXd g = prob.map(i).transpose() * lam;
  if (!prob.linear().empty()) g += prob.linear()[i];
  VectorXd duals = VectorXd::Zero(G.rows());
  const double wn = wi.norm();
  if (wn > 0.0) {
    std::vector<Eigen::Index> tight;
    for (Eigen::Index k = 0; k < G.rows(); ++k)
      if (G.row(k).dot(wi) <= 1e-9 * G.row(k).norm() * wn) tight.push_back(k);
    MatrixXd A(N.cols(), static_cast<Eigen::Index>(tight.size()));
    for (std::size_t t = 0; t < tight.size(); ++t)
      A.col(static_cast<Eigen::Index>(t)) = N.transpose() * G.row(tight[t]).transpose();
    const auto res = nnls(A, N.transpose() * (g + prob.instance().beta * wi / wn));
    for (std::size_t t = 0; t < tight.size(); ++t) duals[tight[t]] = res.x[static_cast<Eigen::Index>(t)];
    return {res.residual_norm, duals};
  }
  const auto res = nnls(N.transpose() * G.transpose(), N.transpose() * g);
  return {std::max(0.0, res.residual_norm - prob.instance().beta), res.x};
}

/// Active-set Newton refinement of a feasible point. The support and the set
/// of tight constraint rows are frozen; inside that face the objective is
/// smooth and Newton converges to machine precision. Steps are clipped to
/// stay feasible; a clipped step makes another row tight and restarts.
/// Returns the refined point only if it is feasible, no worse, and KKT
/// stationary (otherwise the frozen face was the wrong one).
inline std::optional<std::vector<VectorXd>> polish(const ConeLasso& prob, const std::vector<VectorXd>& start) {
  const ProblemInstance& inst = prob.instance();
  const Eigen::Index d = prob.d();
  const double f0 = prob.objective(start);
  std::vector<VectorXd> w = start;

  for (int outer = 0; outer < 4 * static_cast<int>(d) + 8; ++outer) {
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i].squaredNorm() > 0.0) support.push_back(i);
    if (support.empty()) break;

    // face bases
    std::vector<MatrixXd> basis(support.size());
    std::vector<std::vector<Eigen::Index>> free_rows(support.size());
    Eigen::Index R = 0;
    for (std::size_t s = 0; s < support.size(); ++s) {
      const auto& cone = prob.cone(support[s]);
      const VectorXd& wi = w[support[s]];
      const MatrixXd& G = cone.inequalities();
      std::vector<Eigen::Index> tight;
      for (Eigen::Index k = 0; k < G.rows(); ++k) {
        if (G.row(k).dot(wi) <= 1e-9 * G.row(k).norm() * wi.norm()) tight.push_back(k);
        else free_rows[s].push_back(k);
      }
      MatrixXd rows(cone.equalities().rows() + static_cast<Eigen::Index>(tight.size()), d);
      rows.topRows(cone.equalities().rows()) = cone.equalities();
      for (std::size_t t = 0; t < tight.size(); ++t)
        rows.row(cone.equalities().rows() + static_cast<Eigen::Index>(t)) = G.row(tight[t]);
      basis[s] = detail::null_basis(rows, d);
      R += basis[s].cols();
    }
    // A block whose tight rows pin it to the apex is numerical debris: drop
    // it. Otherwise move the block onto its face.
    bool dropped = false;
    for (std::size_t s = 0; s < support.size(); ++s) {
      VectorXd& wi = w[support[s]];
      if (basis[s].cols() == 0) {
        wi.setZero();
        dropped = true;
      } else {
        wi = basis[s] * (basis[s].transpose() * wi);
      }
    }
    if (dropped) continue;

    MatrixXd Bm(inst.n(), R);
    VectorXd y(R), lin = VectorXd::Zero(R);
    std::vector<Eigen::Index> offset(support.size());
    for (std::size_t s = 0, off = 0; s < support.size(); ++s) {
      const Eigen::Index r = basis[s].cols();
      offset[s] = static_cast<Eigen::Index>(off);
      Bm.middleCols(static_cast<Eigen::Index>(off), r) = prob.map(support[s]) * basis[s];
      y.segment(static_cast<Eigen::Index>(off), r) = basis[s].transpose() * w[support[s]];
      if (!prob.linear().empty())
        lin.segment(static_cast<Eigen::Index>(off), r) = basis[s].transpose() * prob.linear()[support[s]];
      off += static_cast<std::size_t>(r);
    }
    auto F = [&](const VectorXd& yy) {
      double f = loss_value(inst, Bm * yy) + lin.dot(yy);
      for (std::size_t s = 0; s < support.size(); ++s) f += inst.beta * yy.segment(offset[s], basis[s].cols()).norm();
      return f;
    };

    bool blocked = false;
    double fy = F(y);
    for (int it = 0; it < 100; ++it) {
      const VectorXd v = Bm * y;
      VectorXd grad = Bm.transpose() * loss_gradient(inst, v) + lin;
      MatrixXd H = Bm.transpose() * loss_hessian_diag(inst, v).asDiagonal() * Bm;
      bool degenerate = false;
      for (std::size_t s = 0; s < support.size(); ++s) {
        const Eigen::Index r = basis[s].cols();
        const VectorXd ys = y.segment(offset[s], r);
        const double nrm = ys.norm();
        if (nrm == 0.0) {
          degenerate = true;
          break;
        }
        const VectorXd yh = ys / nrm;
        grad.segment(offset[s], r) += inst.beta * yh;
        H.block(offset[s], offset[s], r, r) +=
            (inst.beta / nrm) * (MatrixXd::Identity(r, r) - yh * yh.transpose());
      }
      if (degenerate) break;
      const double gscale = 1.0 + loss_gradient(inst, v).cwiseAbs().maxCoeff() + inst.beta;
      if (grad.norm() <= 1e-15 * gscale) break;
      H.diagonal().array() += 1e-14 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
      VectorXd step = H.ldlt().solve(-grad);
      if (!step.allFinite() || grad.dot(step) >= 0.0) step = -grad;

      // feasibility limit from the free rows
      double t_max = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < support.size(); ++s) {
        const auto& G = prob.cone(support[s]).inequalities();
        const VectorXd wi = basis[s] * y.segment(offset[s], basis[s].cols());
        const VectorXd dwi = basis[s] * step.segment(offset[s], basis[s].cols());
        for (Eigen::Index k : free_rows[s]) {
          const double rate = G.row(k).dot(dwi);
          if (rate < 0.0) t_max = std::min(t_max, std::max(0.0, G.row(k).dot(wi)) / -rate);
        }
      }
      double t = std::min(1.0, t_max);
      const bool clip = t_max <= 1.0;
      const double slope = grad.dot(step);
      double f_new = F(y + t * step);
      while (f_new > fy + 1e-4 * t * slope && t > 1e-12) {
        t *= 0.5;
        f_new = F(y + t * step);
      }
      if (!(f_new <= fy)) break;
      y += t * step;
      const double decrease = fy - f_new;
      fy = f_new;
      if (clip && t == t_max) {
        blocked = true;
        break;
      }
      if (decrease <= 1e-16 * (1.0 + std::abs(fy)) && t == 1.0) break;
    }
    for (std::size_t s = 0; s < support.size(); ++s)
      w[support[s]] = basis[s] * y.segment(offset[s], basis[s].cols());
    if (!blocked) break;
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    // snap tight rows exactly onto the cone
    if (w[i].squaredNorm() > 0.0 && !prob.cone(i).contains(w[i], 0.0)) w[i] = prob.cone(i).project(w[i]);
  }
  if (!prob.feasible(w) || !(prob.objective(w) <= f0)) return std::nullopt;
  const VectorXd lam = loss_gradient(inst, prob.prediction(w));
  const double tol = 1e-7 * (1.0 + lam.cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < w.size(); ++i)
    if (block_kkt(prob, i, w[i], lam).first > tol) return std::nullopt;
  return w;
}

/// Graph-form ADMM on (w, v) with v = A w, A = [M_1 ... M_B] scaled to unit
/// spectral norm. The w-prox is exact: group_soft_threshold(P_K(.), beta/rho)
/// is the prox of beta ||.|| + indicator(K) for a closed convex cone K. The
/// graph projection uses a fixed n x n Cholesky factor (Woodbury), so penalty
/// updates never refactor.
inline std::pair<std::vector<VectorXd>, SolveStats> solve_cone_lasso(
    const ConeLasso& prob, const SolverOptions& opts = {}, const std::vector<VectorXd>* warm_start = nullptr) {
  const ProblemInstance& inst = prob.instance();
  const std::size_t B = prob.blocks();
  const Eigen::Index d = prob.d(), n = inst.n();
  const Eigen::Index N = static_cast<Eigen::Index>(B) * d;
  SolveStats stats;
  stats.tol = opts.tol > 0.0 ? opts.tol : 1e-6 * std::sqrt(static_cast<double>(std::max<Eigen::Index>(N, 1)));
  if (B == 0) {
    stats.objective = loss_value(inst, VectorXd::Zero(n));
    stats.converged = true;
    return {{}, stats};
  }

  MatrixXd A(n, N);
  for (std::size_t i = 0; i < B; ++i) A.middleCols(static_cast<Eigen::Index>(i) * d, d) = prob.map(i);
  double sigma = std::sqrt(std::max(0.0, Eigen::SelfAdjointEigenSolver<MatrixXd>(A * A.transpose(),
                                                                                 Eigen::EigenvaluesOnly)
                                             .eigenvalues()
                                             .maxCoeff()));
  if (!(sigma > 0.0)) sigma = 1.0;
  const MatrixXd Ah = A / sigma;
  const Eigen::LLT<MatrixXd> K(MatrixXd::Identity(n, n) + Ah * Ah.transpose());

  VectorXd c_lin = VectorXd::Zero(N);
  if (!prob.linear().empty())
    for (std::size_t i = 0; i < B; ++i) c_lin.segment(static_cast<Eigen::Index>(i) * d, d) = prob.linear()[i];

  VectorXd x = VectorXd::Zero(N), v = VectorXd::Zero(n);
  if (warm_start && warm_start->size() == B) {
    for (std::size_t i = 0; i < B; ++i) x.segment(static_cast<Eigen::Index>(i) * d, d) = (*warm_start)[i];
    v = Ah * x;
  }
  VectorXd xt = VectorXd::Zero(N), vt = VectorXd::Zero(n);
  VectorXd xh(N), vh(n);
  double rho = opts.rho;
  const double a = opts.relaxation;

  auto prox_g = [&](const VectorXd& in, double r, VectorXd& out) {
    for (std::size_t i = 0; i < B; ++i) {
      const Eigen::Index off = static_cast<Eigen::Index>(i) * d;
      VectorXd seg = in.segment(off, d) - c_lin.segment(off, d) / r;
      out.segment(off, d) = group_soft_threshold(prob.cone(i).project(seg), inst.beta / r);
    }
  };

  int it = 0;
  // Runs ADMM until both residuals fall below `target` or the budget is spent.
  auto run = [&](double target) {
    for (; it < opts.max_iter; ++it) {
      prox_g(x - xt, rho, xh);
      vh = detail::loss_prox(inst, v - vt, sigma, rho);
      const VectorXd xr = a * xh + (1.0 - a) * x;
      const VectorXd vr = a * vh + (1.0 - a) * v;
      const VectorXd rhs = (xr + xt) + Ah.transpose() * (vr + vt);
      const VectorXd x_new = rhs - Ah.transpose() * K.solve(Ah * rhs);
      const VectorXd v_new = Ah * x_new;
      xt += xr - x_new;
      vt += vr - v_new;
      stats.primal_residual = std::sqrt((xh - x_new).squaredNorm() + (vh - v_new).squaredNorm());
      stats.dual_residual = rho * std::sqrt((x_new - x).squaredNorm() + (v_new - v).squaredNorm());
      x = x_new;
      v = v_new;
      if (stats.primal_residual <= target && stats.dual_residual <= target && it > 0) {
        ++it;
        break;
      }
      if (it % 10 == 9) {
        if (stats.primal_residual > 10.0 * stats.dual_residual) {
          rho *= 2.0;
          xt /= 2.0;
          vt /= 2.0;
        } else if (stats.dual_residual > 10.0 * stats.primal_residual) {
          rho /= 2.0;
          xt *= 2.0;
          vt *= 2.0;
        }
      }
    }
    return stats.primal_residual <= target && stats.dual_residual <= target;
  };
  auto current = [&] {
    std::vector<VectorXd> w(B);
    for (std::size_t i = 0; i < B; ++i) w[i] = xh.segment(static_cast<Eigen::Index>(i) * d, d);
    return w;
  };

  stats.converged = run(stats.tol);
  std::vector<VectorXd> w = current();
  if (opts.polish) {
    // A failed polish usually means the support is not settled yet: tighten
    // the ADMM target and try again.
    double target = stats.tol;
    for (int round = 0; round < 4; ++round) {
      if (auto refined = polish(prob, w)) {
        w = std::move(*refined);
        stats.polished = true;
        break;
      }
      if (round == 3 || it >= opts.max_iter) break;
      target /= 100.0;
      run(target);
      w = current();
    }
  }
  stats.iterations = it;
  stats.objective = prob.objective(w);
  return {w, stats};
}

/// Signed block maps D_i X for the 2p dichotomy blocks.
inline ConeLasso dichotomy_problem(const ProblemInstance& inst, const std::vector<Dichotomy>& dichotomies) {
  std::vector<MatrixXd> maps;
  std::vector<std::shared_ptr<const PolyhedralCone>> cones;
  const std::size_t p = dichotomies.size() / 2;
  std::vector<std::shared_ptr<const PolyhedralCone>> shared(p);
  for (std::size_t i = 0; i < p; ++i)
    shared[i] = std::make_shared<const PolyhedralCone>(dichotomy_cone(inst.X, dichotomies[i].pattern));
  for (const auto& dich : dichotomies) {
    MatrixXd M = inst.X;
    for (Eigen::Index k = 0; k < M.rows(); ++k)
      if (!dich.pattern[static_cast<std::size_t>(k)]) M.row(k).setZero();
    if (!dich.positive) M = -M;
    maps.push_back(std::move(M));
    cones.push_back(shared[static_cast<std::size_t>(dich.index - 1) % p]);
  }
  return ConeLasso(inst, std::move(maps), std::move(cones));
}

/// Blocks T_j X and -T_j X over the chosen trichotomies.
inline ConeLasso trichotomy_problem(const ProblemInstance& inst, const std::vector<Trichotomy>& trichotomies,
                                    const std::vector<int>& subset) {
  std::vector<MatrixXd> maps(2 * subset.size());
  std::vector<std::shared_ptr<const PolyhedralCone>> cones(2 * subset.size());
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const auto& tri = trichotomies.at(static_cast<std::size_t>(subset[k] - 1));
    MatrixXd M = inst.X;
    for (Eigen::Index r = 0; r < M.rows(); ++r)
      if (tri.signs[static_cast<std::size_t>(r)] <= 0) M.row(r).setZero();
    auto cone = std::make_shared<const PolyhedralCone>(trichotomy_cone(inst.X, tri.signs));
    maps[k] = M;
    maps[k + subset.size()] = -M;
    cones[k] = cone;
    cones[k + subset.size()] = cone;
  }
  return ConeLasso(inst, std::move(maps), std::move(cones));
}

inline void check_point(const ProblemInstance& inst, const std::vector<Dichotomy>& dichotomies, const ConvexPoint& W) {
  if (W.blocks.size() != dichotomies.size())
    throw Error(ErrorCode::dim_mismatch, "convex point has " + std::to_string(W.blocks.size()) + " blocks, expected " +
                                             std::to_string(dichotomies.size()));
  for (const auto& b : W.blocks)
    if (b.size() != inst.d()) throw Error(ErrorCode::dim_mismatch, "block dimension differs from d");
}

/// Prediction sum_i D_i X w_i.
inline VectorXd prediction_c(const ProblemInstance& inst, const std::vector<Dichotomy>& dichotomies,
                             const ConvexPoint& W) {
  check_point(inst, dichotomies, W);
  VectorXd v = VectorXd::Zero(inst.n());
  for (std::size_t i = 0; i < dichotomies.size(); ++i) {
    const VectorXd z = inst.X * W.blocks[i];
    const double s = dichotomies[i].positive ? 1.0 : -1.0;
    for (Eigen::Index k = 0; k < z.size(); ++k)
      if (dichotomies[i].pattern[static_cast<std::size_t>(k)]) v[k] += s * z[k];
  }
  return v;
}

inline bool is_feasible(const ProblemInstance& inst, const std::vector<Dichotomy>& dichotomies, const ConvexPoint& W) {
  check_point(inst, dichotomies, W);
  for (std::size_t i = 0; i < dichotomies.size(); ++i)
    if (!cone_membership(inst.X, dichotomies[i].pattern, W.blocks[i])) return false;
  return true;
}

/// l(sum_i D_i X w_i) + beta sum_i ||w_i||.
inline double objective_c(const ProblemInstance& inst, const std::vector<Dichotomy>& dichotomies,
                          const ConvexPoint& W) {
  if (!is_feasible(inst, dichotomies, W))
    throw Error(ErrorCode::infeasible_point, "a block violates its cone constraint");
  double f = loss_value(inst, prediction_c(inst, dichotomies, W));
  for (const auto& b : W.blocks) f += inst.beta * b.norm();
  return f;
}

inline SolveReport solve_dichotomy_program(const ProblemInstance& inst, const std::vector<Dichotomy>& dichotomies,
                                           const SolverOptions& opts = {}) {
  inst.validate();
  const ConeLasso prob = dichotomy_problem(inst, dichotomies);
  auto [w, stats] = solve_cone_lasso(prob, opts);
  SolveReport rep;
  static_cast<SolveStats&>(rep) = stats;
  rep.point.blocks = std::move(w);
  return rep;
}

/// Subsampled trichotomy program over `subset` (1-based trichotomy indices); std::nullopt means all.
inline TriSolveReport solve_trichotomy_program(const ProblemInstance& inst, const std::vector<Trichotomy>& trichotomies,
                                               std::optional<std::vector<int>> subset = std::nullopt,
                                               const SolverOptions& opts = {}) {
  inst.validate();
  std::vector<int> idx;
  if (subset) {
    idx = *subset;
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    for (int j : idx)
      if (j < 1 || j > static_cast<int>(trichotomies.size()))
        throw Error(ErrorCode::invalid_instance, "trichotomy index " + std::to_string(j) + " out of range");
  } else {
    for (const auto& t : trichotomies) idx.push_back(t.index);
  }
  const ConeLasso prob = trichotomy_problem(inst, trichotomies, idx);
  auto [w, stats] = solve_cone_lasso(prob, opts);
  TriSolveReport rep;
  static_cast<SolveStats&>(rep) = stats;
  rep.point.subset = std::move(idx);
  rep.point.blocks = std::move(w);
  return rep;
}

}  // namespace relu_lift
