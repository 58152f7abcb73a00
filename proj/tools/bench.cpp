// Timing comparison between the OpenMP kernels and their serial reference
// implementations.

#include <chrono>
#include <cstdio>
#include <random>

#include "dfl/crystal.hpp"
#include "dfl/mmot.hpp"
#include "dfl/parallel.hpp"

using namespace dfl;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double timed(F&& f, double* result) {
  double t0 = now_seconds();
  *result = f();
  return now_seconds() - t0;
}

} // namespace

int main(int argc, char** argv) {
  int npts = argc > 1 ? std::atoi(argv[1]) : 2000;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  std::vector<std::array<double, 3>> pts(npts);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  auto w = InteractionKernel::coulomb3d();

  double serial_val = 0.0, parallel_val = 0.0;
  double ts = timed([&] { return pair_sum_serial(pts, 3, w); }, &serial_val);
  double tp = timed([&] { return pair_sum(pts, 3, w); }, &parallel_val);
  std::printf("pair_sum       n=%-6d serial %8.3f ms   omp %8.3f ms   speedup %5.2fx   equal=%d\n",
              npts, ts * 1e3, tp * 1e3, ts / tp, serial_val == parallel_val);

  // hartree double sum on a large 1d grid
  std::size_t m = argc > 2 ? std::size_t(std::atoll(argv[2])) : 4096;
  Grid g(std::vector<std::size_t>{m}, {double(m) / 64.0});
  std::vector<double> masses(m);
  for (auto& x : masses) x = u(rng) / 50.0 / double(m);
  DiscreteDensity rho(g, masses);
  auto wk = InteractionKernel::riesz(0.5);
  set_thread_cap(1);
  double th1 = timed([&] { return hartree(rho, wk); }, &serial_val);
  set_thread_cap(0);
  double thp = timed([&] { return hartree(rho, wk); }, &parallel_val);
  std::printf("hartree        M=%-6zu serial %8.3f ms   omp %8.3f ms   speedup %5.2fx   equal=%d\n",
              m, th1 * 1e3, thp * 1e3, th1 / thp, serial_val == parallel_val);

  // d=3 crystal table assembly
  auto z3 = Lattice::from_name("Z3");
  set_thread_cap(1);
  double tc1 = timed([&] { return floating_indirect(z3, 6.0, w).per_volume; }, &serial_val);
  set_thread_cap(0);
  double tcp = timed([&] { return floating_indirect(z3, 6.0, w).per_volume; }, &parallel_val);
  std::printf("crystal L=6    d=3      serial %8.3f ms   omp %8.3f ms   speedup %5.2fx   equal=%d\n",
              tc1 * 1e3, tcp * 1e3, tc1 / tcp, serial_val == parallel_val);
  return 0;
}
