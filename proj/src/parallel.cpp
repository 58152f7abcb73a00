#include "dfl/parallel.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dfl {

namespace {
int g_cap = 0;
}

void set_thread_cap(int n) { g_cap = n < 0 ? 0 : n; }
int thread_cap() { return g_cap; }

int effective_threads() {
#ifdef _OPENMP
  int avail = omp_get_max_threads();
  if (g_cap > 0 && g_cap < avail) return g_cap;
  return avail;
#else
  return 1;
#endif
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::vector<double> parallel_map(std::size_t n, const std::function<double(std::size_t)>& f) {
  std::vector<double> out(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
#else
  for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
#endif
  return out;
}

std::vector<double> serial_map(std::size_t n, const std::function<double(std::size_t)>& f) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
  return out;
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& f) {
  auto vals = parallel_map(n, f);
  return pairwise_sum(vals);
}

double serial_sum(std::size_t n, const std::function<double(std::size_t)>& f) {
  auto vals = serial_map(n, f);
  return pairwise_sum(vals);
}

} // namespace dfl
