#include "dfl/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dfl {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kReducedCostTol = 1e-10;

struct Tableau {
  int m;
  int n; // real columns
  const std::vector<SparseColumn>* cols;
  std::vector<double> b;          // sign-flipped to b >= 0
  std::vector<double> row_sign;   // +-1 applied to each row
  std::vector<int> basis;         // variable index per row; >= n means artificial
  std::vector<double> binv;       // m x m row-major
  std::vector<double> xb;         // basic values
  std::vector<char> in_basis;     // size n + m

  double col_entry_sum(int j, const std::vector<double>& y) const {
    // y . a_j with the sign flips applied
    double s = 0.0;
    for (const auto& [r, v] : (*cols)[j].entries) s += y[r] * row_sign[r] * v;
    return s;
  }

  void dense_col(int j, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (j < n) {
      for (const auto& [r, v] : (*cols)[j].entries) out[r] = row_sign[r] * v;
    } else {
      out[j - n] = 1.0;
    }
  }

  void refactor() {
    // rebuild B and invert by Gauss-Jordan with partial pivoting
    std::vector<double> B(m * m, 0.0), inv(m * m, 0.0), col(m);
    for (int i = 0; i < m; ++i) inv[i * m + i] = 1.0;
    for (int i = 0; i < m; ++i) {
      dense_col(basis[i], col);
      for (int r = 0; r < m; ++r) B[r * m + i] = col[r];
    }
    for (int k = 0; k < m; ++k) {
      int piv = k;
      for (int r = k + 1; r < m; ++r)
        if (std::abs(B[r * m + k]) > std::abs(B[piv * m + k])) piv = r;
      if (std::abs(B[piv * m + k]) < 1e-14)
        throw std::runtime_error("simplex: singular basis during refactorization");
      if (piv != k)
        for (int c = 0; c < m; ++c) {
          std::swap(B[piv * m + c], B[k * m + c]);
          std::swap(inv[piv * m + c], inv[k * m + c]);
        }
      double p = B[k * m + k];
      for (int c = 0; c < m; ++c) {
        B[k * m + c] /= p;
        inv[k * m + c] /= p;
      }
      for (int r = 0; r < m; ++r) {
        if (r == k) continue;
        double f = B[r * m + k];
        if (f == 0.0) continue;
        for (int c = 0; c < m; ++c) {
          B[r * m + c] -= f * B[k * m + c];
          inv[r * m + c] -= f * inv[k * m + c];
        }
      }
    }
    binv = inv;
    // refresh basic values
    for (int i = 0; i < m; ++i) {
      double s = 0.0;
      for (int c = 0; c < m; ++c) s += binv[i * m + c] * b[c];
      xb[i] = s;
    }
  }
};

} // namespace

LpResult simplex_solve(int rows, const std::vector<double>& rhs,
                       const std::vector<SparseColumn>& cols, const std::vector<double>& costs,
                       long long max_iterations) {
  const int m = rows;
  const int n = static_cast<int>(cols.size());
  Tableau t;
  t.m = m;
  t.n = n;
  t.cols = &cols;
  t.b.resize(m);
  t.row_sign.assign(m, 1.0);
  for (int i = 0; i < m; ++i) {
    t.b[i] = rhs[i];
    if (t.b[i] < 0.0) {
      t.b[i] = -t.b[i];
      t.row_sign[i] = -1.0;
    }
  }
  t.basis.resize(m);
  t.in_basis.assign(n + m, 0);
  for (int i = 0; i < m; ++i) {
    t.basis[i] = n + i;
    t.in_basis[n + i] = 1;
  }
  t.binv.assign(m * m, 0.0);
  for (int i = 0; i < m; ++i) t.binv[i * m + i] = 1.0;
  t.xb = t.b;

  LpResult res;
  std::vector<double> y(m), dir(m), col(m);
  long long iters = 0;
  int since_refactor = 0;

  auto iterate = [&](bool phase1) -> LpStatus {
    for (;;) {
      if (iters++ > max_iterations) return LpStatus::iteration_limit;
      if (++since_refactor >= 64) {
        t.refactor();
        since_refactor = 0;
      }
      // y = c_B B^-1
      for (int c = 0; c < m; ++c) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) {
          int v = t.basis[i];
          double cb = phase1 ? (v >= n ? 1.0 : 0.0) : (v >= n ? 0.0 : costs[v]);
          s += cb * t.binv[i * m + c];
        }
        y[c] = s;
      }
      // Bland: first improving column
      int enter = -1;
      for (int j = 0; j < n; ++j) {
        if (t.in_basis[j]) continue;
        double cj = phase1 ? 0.0 : costs[j];
        double rc = cj - t.col_entry_sum(j, y);
        if (rc < -kReducedCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::optimal;
      // direction
      t.dense_col(enter, col);
      for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int c = 0; c < m; ++c) s += t.binv[i * m + c] * col[c];
        dir[i] = s;
      }
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (dir[i] > kPivotTol) {
          double ratio = t.xb[i] / dir[i];
          if (ratio < best - 1e-13 ||
              (ratio < best + 1e-13 && (leave < 0 || t.basis[i] < t.basis[leave]))) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return LpStatus::unbounded;
      // pivot
      double piv = dir[leave];
      t.in_basis[t.basis[leave]] = 0;
      t.in_basis[enter] = 1;
      t.basis[leave] = enter;
      for (int c = 0; c < m; ++c) t.binv[leave * m + c] /= piv;
      for (int i = 0; i < m; ++i) {
        if (i == leave) continue;
        double f = dir[i];
        if (f == 0.0) continue;
        for (int c = 0; c < m; ++c) t.binv[i * m + c] -= f * t.binv[leave * m + c];
      }
      double theta = best;
      for (int i = 0; i < m; ++i) t.xb[i] -= theta * dir[i];
      t.xb[leave] = theta;
    }
  };

  LpStatus st = iterate(true);
  if (st != LpStatus::optimal) {
    res.status = st;
    res.iterations = iters;
    return res;
  }
  double art = 0.0;
  for (int i = 0; i < m; ++i)
    if (t.basis[i] >= n) art += t.xb[i];
  if (art > 1e-8) {
    res.status = LpStatus::infeasible;
    res.iterations = iters;
    return res;
  }
  st = iterate(false);
  res.status = st;
  res.iterations = iters;
  if (st != LpStatus::optimal) return res;

  res.x.assign(n, 0.0);
  for (int i = 0; i < m; ++i)
    if (t.basis[i] < n) res.x[t.basis[i]] = std::max(0.0, t.xb[i]);
  double obj = 0.0;
  for (int i = 0; i < m; ++i)
    if (t.basis[i] < n) obj += costs[t.basis[i]] * t.xb[i];
  res.objective = obj;
  // duals (account for the row sign flips)
  res.duals.assign(m, 0.0);
  for (int c = 0; c < m; ++c) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      int v = t.basis[i];
      double cb = v >= n ? 0.0 : costs[v];
      s += cb * t.binv[i * m + c];
    }
    res.duals[c] = s * t.row_sign[c];
  }
  double yb = 0.0;
  for (int c = 0; c < m; ++c) yb += res.duals[c] * rhs[c];
  res.primal_dual_gap = std::abs(obj - yb);
  return res;
}

} // namespace dfl
