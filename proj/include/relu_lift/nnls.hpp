#pragma once

#include "relu_lift/core.hpp"

#include <vector>

namespace relu_lift {

struct NnlsResult {
  VectorXd x;
  double residual_norm = 0.0;
  bool converged = true;
};

/// Lawson-Hanson active set method for min ||A x - b||_2 subject to x >= 0.
inline NnlsResult nnls(const MatrixXd& A, const VectorXd& b, int max_outer = -1) {
  const Eigen::Index n = A.cols();
  NnlsResult out;
  out.x = VectorXd::Zero(n);
  if (n == 0) {
    out.residual_norm = b.norm();
    return out;
  }
  if (max_outer < 0) max_outer = static_cast<int>(3 * n + 10);
  const double tol = 1e-13 * std::max(1.0, A.norm() * b.norm());

  std::vector<char> passive(n, 0);
  VectorXd& x = out.x;
  VectorXd w = A.transpose() * (b - A * x);

  auto solve_passive = [&](VectorXd& s) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = A.col(idx[k]);
    VectorXd sp = Ap.colPivHouseholderQr().solve(b);
    s = VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) s[idx[k]] = sp[static_cast<Eigen::Index>(k)];
  };

  int outer = 0;
  while (true) {
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[j] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    if (++outer > max_outer) {
      out.converged = false;
      break;
    }
    passive[best] = 1;

    VectorXd s;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      solve_passive(s);
      bool positive = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && s[j] <= 0.0) positive = false;
      if (positive) break;
      double step = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[j] && s[j] <= 0.0) {
          const double denom = x[j] - s[j];
          if (denom > 0.0) step = std::min(step, x[j] / denom);
        }
      }
      x += step * (s - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[j] && x[j] <= 1e-15 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
          passive[j] = 0;
          x[j] = 0.0;
        }
      }
    }
    x = s.cwiseMax(0.0);
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[j]) x[j] = 0.0;
    w = A.transpose() * (b - A * x);
  }
  out.residual_norm = (A * x - b).norm();
  return out;
}

}  // namespace relu_lift
