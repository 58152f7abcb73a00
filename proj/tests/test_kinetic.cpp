#include <cmath>
#include <random>

#include "dfl/constants.hpp"
#include "dfl/errors.hpp"
#include "dfl/tgc.hpp"
#include "doctest.h"

using namespace dfl;

namespace {

// strictly positive smooth densities on a periodic grid with given mass
DiscreteDensity smooth_density(std::mt19937_64& rng, std::size_t cells, double length, double mass,
                               int modes = 3, double amp = 0.5,
                               Boundary boundary = Boundary::periodic) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> coef_c(modes), coef_s(modes);
  for (int m = 0; m < modes; ++m) {
    coef_c[m] = u(rng) / double(m + 1);
    coef_s[m] = u(rng) / double(m + 1);
  }
  Grid g({cells}, {length}, boundary);
  std::vector<double> vals(cells);
  double tot = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    double x = (double(i) + 0.5) * length / double(cells);
    double f = 1.0;
    for (int m = 0; m < modes; ++m)
      f += amp / modes * (coef_c[m] * std::cos(2 * M_PI * (m + 1) * x / length) +
                          coef_s[m] * std::sin(2 * M_PI * (m + 1) * x / length));
    vals[i] = std::max(0.05, f);
    tot += vals[i];
  }
  std::vector<double> masses(cells);
  for (std::size_t i = 0; i < cells; ++i) masses[i] = mass * vals[i] / tot;
  return DiscreteDensity(g, masses);
}

} // namespace

TEST_CASE("kinetic matrix: constant kernel and plane-wave spectrum") {
  Grid g({16}, {3.0}, Boundary::periodic);
  Matrix k = kinetic_matrix(g);
  // constant vector in the kernel
  std::vector<double> ones(16, 1.0);
  auto kv = matvec(k, ones);
  for (double x : kv) CHECK(std::abs(x) < 1e-10);
  // eigenvalues are k^2/2
  auto es = symmetric_eigen(k);
  auto k2 = momentum_sq_list(g);
  std::sort(k2.begin(), k2.end());
  for (std::size_t j = 0; j < 16; ++j)
    CHECK(es.values[j] == doctest::Approx(0.5 * k2[j]).epsilon(1e-10));
}

TEST_CASE("free Fermi sea") {
  Grid g({64}, {16.0}, Boundary::periodic);
  auto ff = free_fermi(g, 0.1875); // 3 modes
  CHECK(ff.modes == 3);
  // exactly constant diagonal
  for (std::size_t i = 0; i < 64; ++i)
    CHECK(ff.gamma(i, i) == doctest::Approx(3.0 / 64.0).epsilon(1e-12));
  // idempotent projector
  Matrix g2 = matmul(ff.gamma, ff.gamma);
  double err = 0.0;
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j) err = std::max(err, std::abs(g2(i, j) - ff.gamma(i, j)));
  CHECK(err < 1e-10);

  // single constant orbital
  Grid g1({16}, {4.0}, Boundary::periodic);
  auto one = free_fermi(g1, 0.25);
  CHECK(one.modes == 1);
  CHECK(one.energy == doctest::Approx(0.0));

  // energy density converges to the closed-form coefficient at unit density
  Grid big({101}, {101.0}, Boundary::periodic);
  auto sea = free_fermi(big, 1.0);
  CHECK(sea.energy / 101.0 ==
        doctest::Approx(thomas_fermi_constant(1)).epsilon(1e-3 / 1.645));

  CHECK_THROWS_AS(free_fermi(big, 0.5), InputError); // non-integer count

  // O(1/l) convergence rate of the energy density, fitted exponent
  std::vector<double> ls{21, 41, 81, 161}, errs;
  for (double l : ls) {
    Grid gg({std::size_t(l)}, {l}, Boundary::periodic);
    auto s = free_fermi(gg, 1.0);
    errs.push_back(std::abs(thomas_fermi_constant(1) - s.energy / l));
  }
  // err ~ C l^-p: fit p
  double p = std::log(errs[0] / errs[3]) / std::log(ls[3] / ls[0]);
  CHECK(p > 0.8);
  CHECK(p < 2.2);
}

TEST_CASE("dual solver: constant density fills the Fermi sea") {
  Grid g({32}, {3.0}, Boundary::periodic);
  auto rho = density_from_function(g, [](const std::vector<double>&) { return 1.0; });
  auto res = solve_tgc(rho, 1e-8);
  CHECK(res.report.converged);
  CHECK(res.value == doctest::Approx(4.0 * M_PI * M_PI / 9.0).epsilon(1e-6 / 4.39));
  CHECK(res.report.gap <= 1e-7);
  CHECK(res.report.dual <= res.value + 1e-12);
}

TEST_CASE("dual solver: one particle reaches the square-root bound") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 6; ++t) {
    auto rho = smooth_density(rng, 24, 5.0, 1.0);
    auto res = solve_tgc(rho, 1e-8);
    double target = sqrt_gradient_energy(rho);
    CHECK(res.value == doctest::Approx(target).epsilon(1e-6));
    CHECK(res.report.dual <= target + 1e-9);
    // exact marginal
    for (std::size_t i = 0; i < rho.size(); ++i)
      CHECK(res.gamma(i, i) == doctest::Approx(rho.mass(i)).epsilon(1e-12));
  }
}

TEST_CASE("dual solver: zero density and hard walls") {
  Grid g({12}, {3.0}, Boundary::periodic);
  DiscreteDensity zero(g, std::vector<double>(12, 0.0));
  CHECK(solve_tgc(zero).value == 0.0);

  // density supported on a sub-interval: zero cells eliminated exactly
  std::vector<double> m(12, 0.0);
  for (int i = 3; i < 9; ++i) m[i] = 1.0 / 6.0;
  DiscreteDensity walled(g, m);
  auto res = solve_tgc(walled, 1e-7);
  CHECK(res.report.converged);
  for (int i : {0, 1, 2, 9, 10, 11}) {
    CHECK(res.gamma(i, i) == 0.0);
    CHECK(res.gamma(i, 5) == 0.0);
  }
  CHECK(li_yau_slack(walled, res.value) >= -1e-9);
}

TEST_CASE("ordering: dual value below trial states on shared densities") {
  // odd particle numbers keep the ring phase windings integer and the
  // filled shells closed, which is the regime where the chain is clean
  std::mt19937_64 rng(23);
  for (int t = 0; t < 4; ++t) {
    int n = 2 * t + 1;
    auto rho = smooth_density(rng, 32, double(n) * 2.0, double(n), 3, 0.4);
    auto tgc = solve_tgc(rho, 1e-7);
    auto my = march_young(rho, n);
    CHECK(tgc.value <= my.value + 1e-8 * (1.0 + my.value));
    auto lc = layer_cake_dm(rho, 0.5);
    CHECK(tgc.value <= lc.energy + 1e-8 * (1.0 + lc.energy));
  }
}

TEST_CASE("march-young orbitals") {
  // uniform density: plane waves, exact value
  for (int n : {3, 4}) {
    Grid g({std::size_t(32 * n)}, {double(n)});
    auto rho = density_from_function(g, [](const std::vector<double>&) { return 1.0; });
    auto my = march_young(rho, n);
    CHECK(my.orthonormality_error < 1e-10);
    CHECK(my.gradient_term == doctest::Approx(0.0));
    double sumk2 = n % 2 == 1 ? double(n) * (n * n - 1) / 12.0 : double(n) * (n * n - 1) / 12.0;
    CHECK(my.value ==
          doctest::Approx(2.0 * M_PI * M_PI * sumk2 / std::pow(double(n), 3.0) * n).epsilon(1e-12));
    // m = (pi^2/6)(1 - 1/n^2) int rho^3
    CHECK(my.value <= M_PI * M_PI / 6.0 * double(n) + 1e-12);
  }
  // n = 1: pure gradient term
  std::mt19937_64 rng(5);
  auto rho = smooth_density(rng, 40, 2.0, 1.0);
  auto my1 = march_young(rho, 1);
  CHECK(my1.tf_term == doctest::Approx(0.0));
  CHECK(my1.value == doctest::Approx(my1.gradient_term));

  // vanishing interior density is rejected
  Grid g({8}, {2.0});
  std::vector<double> m{0.2, 0.2, 0.0, 0.2, 0.2, 0.2, 0.0, 0.0};
  double tot = 1.0;
  (void)tot;
  CHECK_THROWS_AS(march_young(DiscreteDensity(g, m), 1), InputError);
}

TEST_CASE("march-young bound holds on random densities") {
  // line setting: open grids, half-integer windings at even n
  std::mt19937_64 rng(321);
  for (int t = 0; t < 10; ++t) {
    int n = 1 + int(rng() % 6);
    auto rho = smooth_density(rng, 48, 3.0 + double(n), double(n), 3, 0.5, Boundary::open);
    auto my = march_young(rho, n);
    double rho3 = rho.power_integral(3.0);
    CHECK(my.value <= M_PI * M_PI / 6.0 * rho3 + my.gradient_term + 1e-8);
    CHECK(my.orthonormality_error < 1e-10);
  }
}

TEST_CASE("layer-cake density matrix") {
  // constant density, small delta: collapses onto the Fermi projector
  Grid g({41}, {41.0}, Boundary::periodic);
  auto rho = density_from_function(g, [](const std::vector<double>&) { return 1.0; });
  auto lc = layer_cake_dm(rho, 1e-3);
  CHECK(lc.max_eigenvalue <= 1.0 + 1e-8);
  CHECK(lc.min_eigenvalue >= -1e-10);
  CHECK(lc.energy / 41.0 == doctest::Approx(thomas_fermi_constant(1)).epsilon(0.02));

  // random smooth density: exact marginal after repair, residual small before
  std::mt19937_64 rng(9);
  auto r2 = smooth_density(rng, 48, 24.0, 6.0, 3, 0.3);
  auto lc2 = layer_cake_dm(r2, 0.5);
  CHECK(lc2.marginal_residual < 0.05);
  for (std::size_t i = 0; i < r2.size(); ++i)
    CHECK(lc2.gamma(i, i) == doctest::Approx(r2.mass(i)).epsilon(1e-9));
  CHECK(lc2.max_eigenvalue <= 1.0 + 1e-8);
  CHECK(lc2.min_eigenvalue >= -1e-10);
  // the energy stays within the epsilon-form report
  double rho3 = r2.power_integral(3.0);
  double grad = 2.0 * sqrt_gradient_energy(r2);
  CHECK(lc2.energy <= (1.0 + lc2.epsilon_theory) * thomas_fermi_constant(1) * rho3 +
                          (lc2.gradient_coefficient + 1e-12) * grad + 1e-9);
}

TEST_CASE("inequality slacks") {
  std::mt19937_64 rng(77);
  // free Fermi sea: lieb-thirring slack per length has the closed form
  Grid g({101}, {101.0}, Boundary::periodic);
  auto ff = free_fermi(g, 1.0);
  double slack = lieb_thirring_slack(g, ff.gamma);
  double expected = (1.0 - std::pow(1.456, -2.0)) * ff.energy; // rho^3 integral ~ energy/cTF
  CHECK(slack / 101.0 ==
        doctest::Approx((1.0 - std::pow(1.456, -2.0)) * thomas_fermi_constant(1)).epsilon(2e-3));
  (void)expected;
  CHECK(hoffmann_ostenhof_slack(g, ff.gamma) == doctest::Approx(ff.energy).epsilon(1e-10));

  // rank-one state from a localized gaussian profile: zero
  // hoffmann-ostenhof slack, positive kinetic-inequality slack
  Grid gg({32}, {8.0}, Boundary::periodic);
  auto rho = density_from_function(gg, [](const std::vector<double>& x) {
    return std::exp(-2.0 * (x[0] - 4.0) * (x[0] - 4.0));
  });
  {
    std::vector<double> m = rho.masses();
    double tot = rho.total_mass();
    for (auto& v : m) v /= tot;
    rho = DiscreteDensity(gg, m);
  }
  Matrix rank1(32, 32);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j)
      rank1(i, j) = std::sqrt(rho.mass(i)) * std::sqrt(rho.mass(j));
  CHECK(hoffmann_ostenhof_slack(rho.grid(), rank1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(lieb_thirring_slack(rho.grid(), rank1) > 0.0);

  // monotone weakening in q
  CHECK(lieb_thirring_slack(rho.grid(), rank1, 2.0) > lieb_thirring_slack(rho.grid(), rank1, 1.0));

  // all solver outputs satisfy both bounds
  for (int t = 0; t < 4; ++t) {
    auto r = smooth_density(rng, 24, 6.0, 2.0);
    auto res = solve_tgc(r, 1e-7);
    CHECK(hoffmann_ostenhof_slack(r.grid(), res.gamma) >= -1e-9);
    CHECK(lieb_thirring_slack(r.grid(), res.gamma) >= -1e-9);
  }
}

TEST_CASE("kinetic bracket") {
  std::mt19937_64 rng(31);
  // constant density: bracket is (1 -+ eps) c_TF int rho^{1+2/d} up to the
  // eps^-7-amplified numerical dust in the vanishing gradient term
  Grid g({30}, {30.0}, Boundary::periodic);
  auto flat = density_from_function(g, [](const std::vector<double>&) { return 0.5; });
  double tf = thomas_fermi_constant(1) * flat.power_integral(3.0);
  auto b = lda_kinetic_bracket(flat, 0.1);
  CHECK(b.lower == doctest::Approx(0.9 * tf).epsilon(1e-6));
  CHECK(b.upper == doctest::Approx(1.1 * tf).epsilon(1e-6));
  // bracket widens as eps -> 0 with gradients present
  auto r = smooth_density(rng, 32, 8.0, 3.0);
  auto b1 = lda_kinetic_bracket(r, 0.05);
  auto b2 = lda_kinetic_bracket(r, 0.2);
  CHECK(b1.upper - b1.lower > b2.upper - b2.lower);
  // solver value sits inside the default-parameter bracket on a flat
  // density with an odd closed-shell filling (reported experiment)
  auto res = solve_tgc(flat, 1e-7);
  auto bb = lda_kinetic_bracket(flat, 0.1);
  CHECK(res.value >= bb.lower - 1e-6);
  CHECK(res.value <= bb.upper + 1e-6);
}
