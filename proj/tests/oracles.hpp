#pragma once

// Independent reference computations for the test suites. Nothing here goes
// through the library's enumeration or solver code paths.

#include "relu_lift/lp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Strict-margin LP with u split into positive and negative parts:
//   max t  s.t.  s_k (x_k . u) >= t on strict rows, x_k . u >= 0 on closed rows,
//   x_k . u = 0 on zero rows, 0 <= u+, u- <= 1, t <= 1.
// kinds: +1 strict positive, -1 strict negative, 2 closed nonnegative, 0 zero.
inline double margin(const MatrixXd& X, const std::vector<int>& kinds) {
  const int d = static_cast<int>(X.cols());
  const int nv = 2 * d + 1;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  auto row = [&](const Eigen::RowVectorXd& a, double sign, double tcoef, double rhs) {
    std::vector<double> r(nv, 0.0);
    for (int j = 0; j < d; ++j) {
      r[j] = sign * a[j];
      r[d + j] = -sign * a[j];
    }
    r[2 * d] = tcoef;
    A.push_back(r);
    b.push_back(rhs);
  };
  for (int k = 0; k < X.rows(); ++k) {
    const Eigen::RowVectorXd a = X.row(k);
    switch (kinds[k]) {
      case 1: row(a, -1.0, 1.0, 0.0); break;
      case -1: row(a, 1.0, 1.0, 0.0); break;
      case 2: row(a, -1.0, 0.0, 0.0); break;
      case 0:
        row(a, 1.0, 0.0, 0.0);
        row(a, -1.0, 0.0, 0.0);
        break;
    }
  }
  for (int j = 0; j < 2 * d + 1; ++j) {
    std::vector<double> r(nv, 0.0);
    r[j] = 1.0;
    A.push_back(r);
    b.push_back(1.0);
  }
  std::vector<double> c(nv, 0.0);
  c[2 * d] = 1.0;
  auto res = relu_lift::lp::maximize(A, b, c);
  return res.status == relu_lift::lp::Status::optimal ? res.value : -1.0;
}

// All s in {0,1}^n realizable as 1(Xu >= 0).
inline std::set<std::vector<std::int8_t>> brute_dichotomies(const MatrixXd& X, double t_min = 1e-9) {
  const int n = static_cast<int>(X.rows());
  std::set<std::vector<std::int8_t>> out;
  for (long mask = 0; mask < (1L << n); ++mask) {
    std::vector<int> kinds(n);
    std::vector<std::int8_t> pat(n);
    bool strict = false;
    for (int k = 0; k < n; ++k) {
      pat[k] = (mask >> k) & 1;
      kinds[k] = pat[k] ? 2 : -1;
      strict |= !pat[k];
    }
    if (!strict || margin(X, kinds) > t_min) out.insert(pat);
  }
  return out;
}

inline std::set<std::vector<std::int8_t>> brute_trichotomies(const MatrixXd& X, double t_min = 1e-9) {
  const int n = static_cast<int>(X.rows());
  long total = 1;
  for (int k = 0; k < n; ++k) total *= 3;
  std::set<std::vector<std::int8_t>> out;
  for (long code = 0; code < total; ++code) {
    std::vector<int> kinds(n);
    std::vector<std::int8_t> sg(n);
    long c = code;
    bool strict = false;
    for (int k = 0; k < n; ++k) {
      sg[k] = static_cast<std::int8_t>(c % 3 - 1);
      c /= 3;
      kinds[k] = sg[k];
      strict |= sg[k] != 0;
    }
    if (!strict || margin(X, kinds) > t_min) out.insert(sg);
  }
  return out;
}

// Exhaustive active-set NNLS: min ||A x - b|| over x >= 0 for small column counts.
inline VectorXd brute_nnls(const MatrixXd& A, const VectorXd& b) {
  const int n = static_cast<int>(A.cols());
  VectorXd best = VectorXd::Zero(n);
  double best_val = b.norm();
  for (long mask = 1; mask < (1L << n); ++mask) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
      if ((mask >> j) & 1) idx.push_back(j);
    MatrixXd As(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) As.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
    VectorXd xs = As.completeOrthogonalDecomposition().solve(b);
    if (xs.minCoeff() < 0) continue;
    VectorXd x = VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] = xs[static_cast<Eigen::Index>(k)];
    const double val = (A * x - b).norm();
    if (val < best_val) {
      best_val = val;
      best = x;
    }
  }
  return best;
}

inline MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = g(rng);
  return M;
}

inline VectorXd random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

// Euclidean projection onto {x : G x >= 0} by enumerating the set of rows
// held at equality (exact for small row counts).
inline VectorXd brute_cone_project(const MatrixXd& G, const VectorXd& v) {
  const int r = static_cast<int>(G.rows());
  if (r == 0 || (G * v).minCoeff() >= 0.0) return v;
  VectorXd best = VectorXd::Zero(v.size());
  double best_dist = v.norm();
  for (long mask = 1; mask < (1L << r); ++mask) {
    std::vector<int> idx;
    for (int k = 0; k < r; ++k)
      if ((mask >> k) & 1) idx.push_back(k);
    MatrixXd Gs(static_cast<Eigen::Index>(idx.size()), G.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) Gs.row(static_cast<Eigen::Index>(k)) = G.row(idx[k]);
    const VectorXd x = v - Gs.transpose() * (Gs * Gs.transpose()).completeOrthogonalDecomposition().solve(Gs * v);
    if ((G * x).minCoeff() < -1e-10 * (1.0 + x.norm())) continue;
    const double dist = (x - v).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

// Accelerated proximal gradient for
//   min w * ||sum_i M_i x_i - y||^2 + beta sum_i ||x_i||,  G_i x_i >= 0,
// using the exact prox of beta ||.|| + indicator(cone): project onto the
// cone, then shrink (the cone is invariant under positive scaling).
struct GroupLassoResult {
  std::vector<VectorXd> x;
  double objective;
};

inline GroupLassoResult fista_group_lasso(const std::vector<MatrixXd>& M, const std::vector<MatrixXd>& G,
                                          const VectorXd& y, double beta, double weight = 0.5, int iters = 20000) {
  const std::size_t B = M.size();
  const Eigen::Index d = M[0].cols();
  MatrixXd big(y.size(), static_cast<Eigen::Index>(B) * d);
  for (std::size_t i = 0; i < B; ++i) big.middleCols(static_cast<Eigen::Index>(i) * d, d) = M[i];
  const double s1 = Eigen::JacobiSVD<MatrixXd>(big).singularValues()[0];
  const double L = 2.0 * weight * s1 * s1 + 1e-12;
  auto objective = [&](const std::vector<VectorXd>& x) {
    VectorXd v = -y;
    double reg = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
      v += M[i] * x[i];
      reg += x[i].norm();
    }
    return weight * v.squaredNorm() + beta * reg;
  };
  std::vector<VectorXd> x(B, VectorXd::Zero(d)), z = x;
  double tk = 1.0;
  for (int it = 0; it < iters; ++it) {
    VectorXd r = -y;
    for (std::size_t i = 0; i < B; ++i) r += M[i] * z[i];
    std::vector<VectorXd> xn(B);
    for (std::size_t i = 0; i < B; ++i) {
      const VectorXd step = z[i] - (2.0 * weight / L) * (M[i].transpose() * r);
      const VectorXd p = brute_cone_project(G[i], step);
      const double nrm = p.norm();
      xn[i] = nrm <= beta / L ? VectorXd::Zero(d) : VectorXd((1.0 - beta / L / nrm) * p);
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    for (std::size_t i = 0; i < B; ++i) z[i] = xn[i] + ((tk - 1.0) / tn) * (xn[i] - x[i]);
    // restart when the objective goes up
    if (objective(xn) > objective(x)) {
      z = xn;
      tk = 1.0;
    } else {
      tk = tn;
    }
    x = std::move(xn);
  }
  return {x, objective(x)};
}

// min w ||A x - y||^2 + beta 1'x over x >= 0 by enumerating supports and
// checking the KKT conditions (exact; small column counts only).
inline std::pair<VectorXd, double> brute_nonneg_lasso(const MatrixXd& A, const VectorXd& y, double beta,
                                                      double weight = 0.5) {
  const int c = static_cast<int>(A.cols());
  auto obj = [&](const VectorXd& x) { return weight * (A * x - y).squaredNorm() + beta * x.sum(); };
  VectorXd best = VectorXd::Zero(c);
  double best_val = obj(best);
  for (long mask = 1; mask < (1L << c); ++mask) {
    std::vector<int> idx;
    for (int j = 0; j < c; ++j)
      if ((mask >> j) & 1) idx.push_back(j);
    MatrixXd As(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) As.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
    // 2w As'(As xs - y) + beta = 0
    const VectorXd rhs = As.transpose() * y - VectorXd::Constant(As.cols(), beta / (2.0 * weight));
    const VectorXd xs = (As.transpose() * As).completeOrthogonalDecomposition().solve(rhs);
    if (xs.minCoeff() < 0.0) continue;
    VectorXd x = VectorXd::Zero(c);
    for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] = xs[static_cast<Eigen::Index>(k)];
    const double val = obj(x);
    if (val < best_val) {
      best_val = val;
      best = x;
    }
  }
  return {best, best_val};
}

}  // namespace oracle
