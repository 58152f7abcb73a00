#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace dfl {

// Equality-form linear program  min c.x  s.t.  A x = b, x >= 0, with sparse
// columns. Two-phase revised simplex, explicit basis inverse, Bland's rule
// for both the entering and the leaving tie-break, so runs are deterministic
// and cannot cycle.

struct SparseColumn {
  std::vector<std::pair<int, double>> entries;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  double objective = 0.0;
  std::vector<double> x;     // primal solution, size = #columns
  std::vector<double> duals; // one multiplier per row
  long long iterations = 0;
  double primal_dual_gap = 0.0; // |c.x - y.b| after solve
};

LpResult simplex_solve(int rows, const std::vector<double>& rhs,
                       const std::vector<SparseColumn>& cols, const std::vector<double>& costs,
                       long long max_iterations = 2'000'000);

} // namespace dfl
