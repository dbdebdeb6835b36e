#pragma once

#include "relu_lift/core.hpp"
#include "relu_lift/lp.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace relu_lift {

/// Realizable activation pattern 1(Xu >= 0). Indices run over [1, 2p]; entry
/// i + p repeats the pattern of entry i with the negative orientation.
struct Dichotomy {
  int index = 0;
  std::vector<std::int8_t> pattern;
  bool positive = true;
  VectorXd witness;
};

/// Realizable sign partition (I+, I0, I-) of the samples, stored as a vector
/// of +1 / 0 / -1 entries together with a witness u whose Xu has exactly
/// those signs (up to LP tolerance).
struct Trichotomy {
  int index = 0;
  std::vector<std::int8_t> signs;
  VectorXd witness;

  std::vector<int> plus_set() const { return members(1); }
  std::vector<int> zero_set() const { return members(0); }
  std::vector<int> minus_set() const { return members(-1); }

 private:
  std::vector<int> members(int s) const {
    std::vector<int> out;
    for (std::size_t k = 0; k < signs.size(); ++k)
      if (signs[k] == s) out.push_back(static_cast<int>(k));
    return out;
  }
};

/// Identifies the cone B = Q_j x R_{>0} (sign +1) or Q_j x R_{<0} (sign -1).
struct ConeId {
  int trichotomy = 0;  // 1-based
  int sign = 1;
  auto operator<=>(const ConeId&) const = default;
};

struct EnumerationOptions {
  std::size_t cap = 1'000'000;
  double t_min = 1e-9;
};

inline int numeric_rank(const MatrixXd& X) {
  if (X.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(X);
  qr.setThreshold(1e-12);
  return static_cast<int>(qr.rank());
}

/// Cover's upper bound 2r (e (n-1) / r)^r on the number of dichotomies.
inline double cover_bound(int n, int r) {
  if (r <= 0) return 1.0;
  return 2.0 * r * std::pow(std::exp(1.0) * (n - 1) / r, r);
}

inline double predicted_dichotomy_count(int n, int r) {
  const double all = std::pow(2.0, n);
  if (r <= 0) return 1.0;
  if (n < 2) return all;
  return std::min(all, std::floor(cover_bound(n, r)));
}

namespace detail {

/// Row k of X scaled by 1 / max|x_k|; sign structure is unchanged.
inline MatrixXd normalized_rows(const MatrixXd& X) {
  MatrixXd A = X;
  for (Eigen::Index k = 0; k < A.rows(); ++k) {
    const double s = A.row(k).cwiseAbs().maxCoeff();
    if (s > 0) A.row(k) /= s;
  }
  return A;
}

/// Solves  max t  s.t.  (A u)_k * sign_k >= t  on strict rows,  (A u)_k >= 0
/// on closed rows,  (A u)_k = 0 on equality rows,  |u|_inf <= 1,  0 <= t <= 1.
/// Row kinds: 'P' strict positive, 'N' strict negative, 'C' closed positive,
/// 'Z' equality. Returns (t*, u).
inline std::pair<double, VectorXd> max_margin(const MatrixXd& A, const std::vector<char>& kinds) {
  const Eigen::Index d = A.cols();
  const int nv = static_cast<int>(d) + 1;  // x = u + 1 in [0,2]^d, then t
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  auto add = [&](const Eigen::RowVectorXd& a, double tcoef, double bound) {
    std::vector<double> r(nv, 0.0);
    for (Eigen::Index j = 0; j < d; ++j) r[j] = a[j];
    r[d] = tcoef;
    rows.push_back(std::move(r));
    rhs.push_back(bound);
  };
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const Eigen::RowVectorXd a = A.row(static_cast<Eigen::Index>(k));
    const double a1 = a.sum();
    switch (kinds[k]) {
      case 'P': add(-a, 1.0, -a1); break;   // a.u >= t
      case 'N': add(a, 1.0, a1); break;     // a.u <= -t
      case 'C': add(-a, 0.0, -a1); break;   // a.u >= 0
      case 'Z':
        add(a, 0.0, a1);
        add(-a, 0.0, -a1);
        break;
      default: break;
    }
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(d);
    e[j] = 1.0;
    add(e, 0.0, 2.0);
  }
  add(Eigen::RowVectorXd::Zero(d), 1.0, 1.0);
  std::vector<double> c(nv, 0.0);
  c[d] = 1.0;
  const auto res = lp::maximize(rows, rhs, c);
  VectorXd u = VectorXd::Zero(d);
  if (res.status != lp::Status::optimal) return {-1.0, u};
  for (Eigen::Index j = 0; j < d; ++j) u[j] = res.x[j] - 1.0;
  return {res.value, u};
}

}  // namespace detail

/// LP oracle: is there u with 1(Xu >= 0) equal to `pattern` on rows
/// [0, pattern.size())? Returns a witness on success.
inline std::optional<VectorXd> dichotomy_witness(const MatrixXd& A_normalized,
                                                 const std::vector<std::int8_t>& pattern, double t_min) {
  std::vector<char> kinds(pattern.size());
  bool has_strict = false;
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    kinds[k] = pattern[k] ? 'C' : 'N';
    has_strict |= !pattern[k];
  }
  auto [t, u] = detail::max_margin(A_normalized.topRows(static_cast<Eigen::Index>(pattern.size())), kinds);
  if (!has_strict) return VectorXd::Zero(A_normalized.cols());
  if (t > t_min) return u;
  return std::nullopt;
}

/// LP oracle for trichotomies on the leading rows of A.
inline std::optional<VectorXd> trichotomy_witness(const MatrixXd& A_normalized,
                                                  const std::vector<std::int8_t>& signs, double t_min) {
  std::vector<char> kinds(signs.size());
  bool has_strict = false;
  for (std::size_t k = 0; k < signs.size(); ++k) {
    kinds[k] = signs[k] > 0 ? 'P' : (signs[k] < 0 ? 'N' : 'Z');
    has_strict |= signs[k] != 0;
  }
  auto [t, u] = detail::max_margin(A_normalized.topRows(static_cast<Eigen::Index>(signs.size())), kinds);
  if (!has_strict) return VectorXd::Zero(A_normalized.cols());
  if (t > t_min) return u;
  return std::nullopt;
}

namespace detail {

// Extends realizable prefixes one row at a time. Every realizable full
// pattern restricts to a realizable prefix, so no pattern is missed.
template <class Oracle>
std::vector<std::pair<std::vector<std::int8_t>, VectorXd>> extend_patterns(
    const MatrixXd& A, const std::vector<std::int8_t>& values, std::size_t cap, Oracle&& oracle) {
  std::vector<std::pair<std::vector<std::int8_t>, VectorXd>> current{{{}, VectorXd::Zero(A.cols())}};
  for (Eigen::Index k = 0; k < A.rows(); ++k) {
    std::vector<std::vector<std::int8_t>> candidates;
    for (const auto& [prefix, w] : current) {
      for (auto v : values) {
        auto next = prefix;
        next.push_back(v);
        candidates.push_back(std::move(next));
      }
    }
    std::vector<std::optional<VectorXd>> verdicts(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t i) { verdicts[i] = oracle(A, candidates[i]); });
    current.clear();
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (verdicts[i]) current.emplace_back(std::move(candidates[i]), std::move(*verdicts[i]));
    if (current.size() > cap)
      throw Error(ErrorCode::cap_exceeded,
                  "more than " + std::to_string(cap) + " cells after " + std::to_string(k + 1) + " rows");
  }
  std::sort(current.begin(), current.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return current;
}

}  // namespace detail

/// All 2p dichotomies, lexicographically ordered by pattern; entries p+1..2p
/// are the negatively oriented copies.
inline std::vector<Dichotomy> enumerate_dichotomies(const ProblemInstance& inst,
                                                    const EnumerationOptions& opts = {}) {
  inst.validate();
  const int n = static_cast<int>(inst.n());
  const double predicted = predicted_dichotomy_count(n, numeric_rank(inst.X));
  if (predicted > static_cast<double>(opts.cap))
    throw Error(ErrorCode::cap_exceeded, "predicted " + std::to_string(predicted) + " dichotomies exceed cap " +
                                             std::to_string(opts.cap));
  const MatrixXd A = detail::normalized_rows(inst.X);
  auto found = detail::extend_patterns(A, {0, 1}, opts.cap, [&](const MatrixXd& M, const auto& pat) {
    return dichotomy_witness(M, pat, opts.t_min);
  });
  const int p = static_cast<int>(found.size());
  std::vector<Dichotomy> out;
  out.reserve(2 * found.size());
  for (int side = 0; side < 2; ++side) {
    for (int i = 0; i < p; ++i) {
      Dichotomy dich;
      dich.index = side * p + i + 1;
      dich.pattern = found[i].first;
      dich.positive = side == 0;
      dich.witness = found[i].second;
      out.push_back(std::move(dich));
    }
  }
  return out;
}

inline std::vector<Trichotomy> enumerate_trichotomies(const ProblemInstance& inst,
                                                      const EnumerationOptions& opts = {}) {
  inst.validate();
  if (std::pow(3.0, static_cast<double>(inst.n())) > static_cast<double>(opts.cap)) {
    // 3^n is only an upper bound; the per-row check below enforces the cap exactly.
  }
  const MatrixXd A = detail::normalized_rows(inst.X);
  auto found = detail::extend_patterns(A, {-1, 0, 1}, opts.cap, [&](const MatrixXd& M, const auto& sg) {
    return trichotomy_witness(M, sg, opts.t_min);
  });
  std::vector<Trichotomy> out;
  out.reserve(found.size());
  for (std::size_t j = 0; j < found.size(); ++j) {
    Trichotomy tri;
    tri.index = static_cast<int>(j) + 1;
    tri.signs = std::move(found[j].first);
    tri.witness = std::move(found[j].second);
    out.push_back(std::move(tri));
  }
  return out;
}

/// u in C = {u : (2D - I) X u >= 0} within 1e-10 (1 + ||Xu||_inf).
inline bool cone_membership(const MatrixXd& X, const std::vector<std::int8_t>& pattern, const VectorXd& u) {
  const VectorXd z = X * u;
  const double tol = 1e-10 * (1.0 + (z.size() ? z.cwiseAbs().maxCoeff() : 0.0));
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const double signed_value = pattern[static_cast<std::size_t>(k)] ? z[k] : -z[k];
    if (signed_value < -tol) return false;
  }
  return true;
}

/// Enumerated arrangement with lookup tables.
class Arrangement {
 public:
  Arrangement() = default;

  Arrangement(const ProblemInstance& inst, const EnumerationOptions& opts = {})
      : X_(inst.X),
        dichotomies_(enumerate_dichotomies(inst, opts)),
        trichotomies_(enumerate_trichotomies(inst, opts)) {
    for (const auto& t : trichotomies_) {
      lookup_.emplace(t.signs, t.index);
      int owner = 0;
      for (int i = 1; i <= p() && !owner; ++i) {
        const auto& pat = dichotomy(i).pattern;
        bool ok = true;
        for (std::size_t k = 0; k < pat.size() && ok; ++k) ok = t.signs[k] == 0 || (t.signs[k] > 0) == (pat[k] == 1);
        if (ok) owner = i;
      }
      if (!owner) throw Error(ErrorCode::not_enumerated, "trichotomy refines no enumerated dichotomy");
      owner_.push_back(owner);
    }
  }

  const MatrixXd& X() const { return X_; }
  int p() const { return static_cast<int>(dichotomies_.size() / 2); }
  int q() const { return static_cast<int>(trichotomies_.size()); }
  const std::vector<Dichotomy>& dichotomies() const { return dichotomies_; }
  const std::vector<Trichotomy>& trichotomies() const { return trichotomies_; }
  const Dichotomy& dichotomy(int index) const { return dichotomies_.at(static_cast<std::size_t>(index - 1)); }
  const Trichotomy& trichotomy(int index) const { return trichotomies_.at(static_cast<std::size_t>(index - 1)); }

  std::optional<int> find_trichotomy(const std::vector<std::int8_t>& signs) const {
    auto it = lookup_.find(signs);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  /// Smallest dichotomy index i in [1, p] whose cone C_i contains Q_j.
  int dichotomy_for_trichotomy(int j) const { return owner_.at(static_cast<std::size_t>(j - 1)); }

  /// Sign vector of Xu; entries with |(Xu)_k| <= rel_tol ||x_k|| ||u|| count as zero.
  std::vector<std::int8_t> sign_vector(const VectorXd& u, double rel_tol) const {
    const VectorXd z = X_ * u;
    const double un = u.norm();
    std::vector<std::int8_t> s(static_cast<std::size_t>(z.size()));
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      const double tol = rel_tol * X_.row(k).norm() * un;
      s[static_cast<std::size_t>(k)] = z[k] > tol ? 1 : (z[k] < -tol ? -1 : 0);
    }
    return s;
  }

  /// Trichotomy index of u. Tries a tolerant sign reading first, then the
  /// exact one.
  int trichotomy_of(const VectorXd& u) const {
    for (double tol : {1e-12, 0.0}) {
      if (auto j = find_trichotomy(sign_vector(u, tol))) return *j;
    }
    throw Error(ErrorCode::not_enumerated, "sign pattern of Xu matches no enumerated trichotomy");
  }

  /// Smallest dichotomy index i in [1, p] with u in C_i.
  int dichotomy_of(const VectorXd& u) const {
    for (int i = 1; i <= p(); ++i)
      if (cone_membership(X_, dichotomy(i).pattern, u)) return i;
    throw Error(ErrorCode::not_enumerated, "vector lies in no enumerated dichotomy cone");
  }

 private:
  MatrixXd X_;
  std::vector<Dichotomy> dichotomies_;
  std::vector<Trichotomy> trichotomies_;
  std::map<std::vector<std::int8_t>, int> lookup_;
  std::vector<int> owner_;
};

/// Cone B containing (u, alpha); empty for the zero neuron or alpha = 0.
inline std::optional<ConeId> classify_neuron(const Arrangement& arr, const VectorXd& u, double alpha) {
  if (alpha == 0.0 || u.squaredNorm() == 0.0) return std::nullopt;
  return ConeId{arr.trichotomy_of(u), alpha > 0 ? 1 : -1};
}

}  // namespace relu_lift
