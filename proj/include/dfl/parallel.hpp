#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dfl {

// Worker cap shared by all parallel kernels. 0 = use all available cores.
// Results are independent of the cap: loops write per-index slots and
// reductions happen in a fixed order afterwards.
void set_thread_cap(int n);
int thread_cap();
int effective_threads();

// Fixed-structure pairwise summation. The reduction tree depends only on
// the length of the input, never on the thread count, so sums are
// bit-reproducible.
double pairwise_sum(std::span<const double> values);

// Evaluate f(i) for i in [0,n) in parallel, one slot per index.
std::vector<double> parallel_map(std::size_t n, const std::function<double(std::size_t)>& f);

// Serial reference for parallel_map + pairwise_sum, kept for tests and the
// benchmark target.
std::vector<double> serial_map(std::size_t n, const std::function<double(std::size_t)>& f);

// map + deterministic reduce
double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& f);
double serial_sum(std::size_t n, const std::function<double(std::size_t)>& f);

} // namespace dfl
