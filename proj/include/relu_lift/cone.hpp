#pragma once

#include "relu_lift/core.hpp"
#include "relu_lift/nnls.hpp"

namespace relu_lift {

/// (1 - tau / ||w||)_+ w, the prox of tau ||.||_2.
inline VectorXd group_soft_threshold(const VectorXd& w, double tau) {
  if (tau < 0.0) throw Error(ErrorCode::invalid_instance, "group_soft_threshold: tau must be >= 0");
  const double nrm = w.norm();
  if (nrm <= tau) return VectorXd::Zero(w.size());
  return (1.0 - tau / nrm) * w;
}

/// Polyhedral cone {x : G x >= 0, E x = 0}.
///
/// Projection works in an orthonormal basis N of null(E) and solves the
/// dual nonnegative least-squares problem min_{l >= 0} ||y + (G N)' l||,
/// after which P(y) = y + (G N)' l* (Moreau decomposition).
class PolyhedralCone {
 public:
  PolyhedralCone() = default;

  PolyhedralCone(MatrixXd G, MatrixXd E, Eigen::Index dim) : G_(std::move(G)), E_(std::move(E)), dim_(dim) {
    if (G_.rows() == 0) G_.resize(0, dim_);
    if (E_.rows() == 0) E_.resize(0, dim_);
    drop_zero_rows(G_);
    drop_zero_rows(E_);
    if (E_.rows() == 0) {
      N_ = MatrixXd::Identity(dim_, dim_);
    } else {
      Eigen::JacobiSVD<MatrixXd> svd(E_, Eigen::ComputeFullV);
      const auto& s = svd.singularValues();
      const double thresh = 1e-12 * std::max(1.0, s.size() ? s[0] : 0.0);
      Eigen::Index rank = 0;
      for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s[k] > thresh) ++rank;
      N_ = svd.matrixV().rightCols(dim_ - rank);
    }
    GN_ = G_ * N_;
  }

  Eigen::Index dim() const { return dim_; }
  const MatrixXd& inequalities() const { return G_; }
  const MatrixXd& equalities() const { return E_; }
  /// Orthonormal basis of the equality subspace.
  const MatrixXd& basis() const { return N_; }

  /// Largest constraint violation scaled by row norms.
  double violation(const VectorXd& x) const {
    double v = 0.0;
    for (Eigen::Index k = 0; k < G_.rows(); ++k) v = std::max(v, -G_.row(k).dot(x) / G_.row(k).norm());
    for (Eigen::Index k = 0; k < E_.rows(); ++k) v = std::max(v, std::abs(E_.row(k).dot(x)) / E_.row(k).norm());
    return v;
  }

  bool contains(const VectorXd& x, double rel_tol = 1e-10) const {
    return violation(x) <= rel_tol * (1.0 + x.norm());
  }

  VectorXd project(const VectorXd& v) const {
    const VectorXd y = N_.transpose() * v;
    if (y.size() == 0) return VectorXd::Zero(dim_);
    if (GN_.rows() == 0 || (GN_ * y).minCoeff() >= 0.0) return N_ * y;
    const auto res = nnls(GN_.transpose(), -y);
    if (!res.converged) throw Error(ErrorCode::projection_stalled, "cone projection: NNLS did not converge");
    VectorXd p = y + GN_.transpose() * res.x;
    // clean tiny negative residue on the active rows
    const VectorXd r = GN_ * p;
    if (r.minCoeff() < 0.0) {
      for (Eigen::Index k = 0; k < r.size(); ++k) {
        if (r[k] < 0.0 && r[k] > -1e-12 * (1.0 + p.norm()) * GN_.row(k).norm()) {
          p -= (r[k] / GN_.row(k).squaredNorm()) * GN_.row(k).transpose();
        }
      }
    }
    return N_ * p;
  }

 private:
  static void drop_zero_rows(MatrixXd& M) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < M.rows(); ++k)
      if (M.row(k).squaredNorm() > 0.0) keep.push_back(k);
    if (static_cast<Eigen::Index>(keep.size()) == M.rows()) return;
    MatrixXd out(static_cast<Eigen::Index>(keep.size()), M.cols());
    for (std::size_t k = 0; k < keep.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = M.row(keep[k]);
    M = std::move(out);
  }

  MatrixXd G_, E_, N_, GN_;
  Eigen::Index dim_ = 0;
};

/// Cone C = {u : (2D - I) X u >= 0} of a dichotomy pattern.
inline PolyhedralCone dichotomy_cone(const MatrixXd& X, const std::vector<std::int8_t>& pattern) {
  MatrixXd G = X;
  for (Eigen::Index k = 0; k < X.rows(); ++k)
    if (!pattern[static_cast<std::size_t>(k)]) G.row(k) *= -1.0;
  return PolyhedralCone(G, MatrixXd(0, X.cols()), X.cols());
}

/// Closed cone Q = {u : X_{I+} u >= 0, X_{I0} u = 0, X_{I-} u <= 0}.
inline PolyhedralCone trichotomy_cone(const MatrixXd& X, const std::vector<std::int8_t>& signs) {
  std::vector<Eigen::Index> ineq, eq;
  for (Eigen::Index k = 0; k < X.rows(); ++k) (signs[static_cast<std::size_t>(k)] == 0 ? eq : ineq).push_back(k);
  MatrixXd G(static_cast<Eigen::Index>(ineq.size()), X.cols());
  MatrixXd E(static_cast<Eigen::Index>(eq.size()), X.cols());
  for (std::size_t r = 0; r < ineq.size(); ++r)
    G.row(static_cast<Eigen::Index>(r)) = X.row(ineq[r]) * static_cast<double>(signs[static_cast<std::size_t>(ineq[r])]);
  for (std::size_t r = 0; r < eq.size(); ++r) E.row(static_cast<Eigen::Index>(r)) = X.row(eq[r]);
  return PolyhedralCone(G, E, X.cols());
}

}  // namespace relu_lift
