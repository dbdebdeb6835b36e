#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace relu_lift::lp {

enum class Status { optimal, infeasible, unbounded };

struct Result {
  Status status = Status::infeasible;
  double value = 0.0;
  std::vector<double> x;
};

/// Dense tableau simplex for
///
///     maximize c'x  subject to  A x <= b,  x >= 0.
///
/// Phase one pivots on an artificial column when b has negative entries.
/// Entering column is the most negative reduced cost; the leaving row is
/// chosen by a two-pass (Harris) ratio test. Ties are broken by variable
/// id. A pivot cap turns a stalled run into Status::unbounded, which
/// callers treat as failure.
class DenseSimplex {
 public:
  using Row = std::vector<double>;

  DenseSimplex(const std::vector<Row>& A, const Row& b, const Row& c, double eps = 1e-11)
      : m_(static_cast<int>(b.size())),
        n_(static_cast<int>(c.size())),
        eps_(eps),
        nonbasic_(n_ + 1),
        basic_(m_),
        table_(m_ + 2, Row(n_ + 2, 0.0)) {
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) table_[i][j] = A[i][j];
    for (int i = 0; i < m_; ++i) {
      basic_[i] = n_ + i;
      table_[i][n_] = -1.0;
      table_[i][n_ + 1] = b[i];
    }
    for (int j = 0; j < n_; ++j) {
      nonbasic_[j] = j;
      table_[m_][j] = -c[j];
    }
    nonbasic_[n_] = -1;
    table_[m_ + 1][n_] = 1.0;
  }

  Result solve() {
    Result res;
    int r = 0;
    for (int i = 1; i < m_; ++i)
      if (table_[i][n_ + 1] < table_[r][n_ + 1]) r = i;
    if (m_ > 0 && table_[r][n_ + 1] < -eps_) {
      pivot(r, n_);
      if (!run(2) || table_[m_ + 1][n_ + 1] < -eps_) {
        res.status = Status::infeasible;
        return res;
      }
      // drive the artificial variable out of the basis
      for (int i = 0; i < m_; ++i) {
        if (basic_[i] != -1) continue;
        int s = 0;
        for (int j = 1; j <= n_; ++j)
          if (better(table_[i][j], nonbasic_[j], table_[i][s], nonbasic_[s])) s = j;
        pivot(i, s);
      }
    }
    const bool bounded = run(1);
    res.x.assign(n_, 0.0);
    for (int i = 0; i < m_; ++i)
      if (basic_[i] >= 0 && basic_[i] < n_) res.x[basic_[i]] = table_[i][n_ + 1];
    if (!bounded) {
      res.status = Status::unbounded;
      res.value = std::numeric_limits<double>::infinity();
      return res;
    }
    res.status = Status::optimal;
    res.value = table_[m_][n_ + 1];
    return res;
  }

 private:
  static bool better(double a, int ida, double b, int idb) {
    return a < b || (a == b && ida < idb);
  }

  void pivot(int r, int s) {
    const double inv = 1.0 / table_[r][s];
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == r || std::abs(table_[i][s]) <= eps_) continue;
      const double f = table_[i][s] * inv;
      for (int j = 0; j < n_ + 2; ++j) table_[i][j] -= table_[r][j] * f;
      table_[i][s] = table_[r][s] * f;
    }
    for (int j = 0; j < n_ + 2; ++j)
      if (j != s) table_[r][j] *= inv;
    for (int i = 0; i < m_ + 2; ++i)
      if (i != r) table_[i][s] *= -inv;
    table_[r][s] = inv;
    std::swap(basic_[r], nonbasic_[s]);
  }

  bool run(int phase) {
    const int objective_row = m_ + phase - 1;
    const int max_pivots = 50 * (m_ + n_ + 2);
    for (int iter = 0; iter < max_pivots; ++iter) {
      // Dantzig first; Bland's rule later guards against cycling on degenerate vertices.
      const bool bland = iter > max_pivots / 4;
      int s = -1;
      for (int j = 0; j <= n_; ++j) {
        if (nonbasic_[j] == -phase) continue;
        if (bland) {
          if (table_[objective_row][j] < -eps_ && (s == -1 || nonbasic_[j] < nonbasic_[s])) s = j;
          continue;
        }
        if (s == -1 || better(table_[objective_row][j], nonbasic_[j], table_[objective_row][s], nonbasic_[s]))
          s = j;
      }
      if (s == -1 || table_[objective_row][s] >= -eps_) return true;
      // Two-pass ratio test: find the smallest ratio with slightly relaxed
      // bounds, then take the largest pivot among rows within that bound.
      // Tiny pivots on degenerate vertices otherwise wreck the tableau.
      double bound = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i)
        if (table_[i][s] > eps_) bound = std::min(bound, (std::max(table_[i][n_ + 1], 0.0) + eps_) / table_[i][s]);
      int r = -1;
      for (int i = 0; i < m_; ++i) {
        if (table_[i][s] <= eps_ || std::max(table_[i][n_ + 1], 0.0) / table_[i][s] > bound) continue;
        if (r == -1 || (bland ? basic_[i] < basic_[r]
                              : table_[i][s] > table_[r][s] || (table_[i][s] == table_[r][s] && basic_[i] < basic_[r])))
          r = i;
      }
      if (r == -1) return false;
      pivot(r, s);
    }
    return false;
  }

  int m_, n_;
  double eps_;
  std::vector<int> nonbasic_, basic_;
  std::vector<Row> table_;
};

inline Result maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                       const std::vector<double>& c) {
  return DenseSimplex(A, b, c).solve();
}

}  // namespace relu_lift::lp
