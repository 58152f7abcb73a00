#include <cmath>
#include <random>

#include "dfl/cellint.hpp"
#include "dfl/crystal.hpp"
#include "dfl/errors.hpp"
#include "dfl/numerics.hpp"
#include "dfl/zeta.hpp"
#include "doctest.h"

using namespace dfl;

TEST_CASE("finite crystal counts") {
  auto z1 = Lattice::from_name("Z1");
  auto fc = finite_crystal(z1, 3.0);
  REQUIRE(fc.count() == 3);
  CHECK(fc.pts[0][0] == doctest::Approx(-1.0));
  CHECK(fc.pts[2][0] == doctest::Approx(1.0));

  auto z3 = Lattice::from_name("Z3");
  CHECK(finite_crystal(z3, 2.0).count() == 8);

  auto bcc = Lattice::from_name("BCC");
  for (double L : {6.0, 10.0, 14.0}) {
    auto c = finite_crystal(bcc, L);
    CHECK(double(c.count()) / (L * L * L) == doctest::Approx(1.0).epsilon(0.25));
  }
}

TEST_CASE("pair sum") {
  std::vector<std::array<double, 3>> pts{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  auto w1 = InteractionKernel::riesz(1.0);
  CHECK(pair_sum(pts, 1, w1) == doctest::Approx(2.5));
  std::vector<std::array<double, 3>> two{{0, 0, 0}, {2, 0, 0}};
  CHECK(pair_sum(two, 1, InteractionKernel::riesz(2.0)) == doctest::Approx(0.25));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<std::array<double, 3>> rnd(10);
  for (auto& p : rnd) p = {u(rng), u(rng), u(rng)};
  double brute = 0.0;
  for (int i = 0; i < 10; ++i)
    for (int j = i + 1; j < 10; ++j) {
      double dx = rnd[i][0] - rnd[j][0], dy = rnd[i][1] - rnd[j][1], dz = rnd[i][2] - rnd[j][2];
      brute += 1.0 / std::sqrt(dx * dx + dy * dy + dz * dz);
    }
  CHECK(pair_sum(rnd, 3, w1) == doctest::Approx(brute).epsilon(1e-13));
  CHECK(pair_sum_serial(rnd, 3, w1) == pair_sum(rnd, 3, w1));
}

TEST_CASE("box self integral") {
  auto w = InteractionKernel::riesz(0.5);
  CHECK(box_self_integral(1, w, 1.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  // scaling in L
  for (int d : {1, 2, 3}) {
    double s = 0.5;
    auto k = InteractionKernel::riesz(s);
    double v1 = box_self_integral(d, k, 1.0);
    double v3 = box_self_integral(d, k, 3.0);
    CHECK(v3 == doctest::Approx(std::pow(3.0, 2.0 * d - s) * v1).epsilon(1e-12));
  }
  CHECK(box_self_integral(1, InteractionKernel::neg_abs(), 2.0) == doctest::Approx(-8.0 / 6.0));
}

TEST_CASE("box self integral d=3 Coulomb matches Monte-Carlo oracle") {
  auto w = InteractionKernel::coulomb3d();
  double quad = box_self_integral(3, w, 1.0);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 10'000'000;
  double acc = 0.0, acc2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double dx = u(rng) - u(rng), dy = u(rng) - u(rng), dz = u(rng) - u(rng);
    double v = 1.0 / std::sqrt(dx * dx + dy * dy + dz * dz);
    acc += v;
    acc2 += v * v;
  }
  double mean = acc / n;
  double sigma = std::sqrt((acc2 / n - mean * mean) / n);
  CHECK(std::abs(0.5 * mean - quad) < 3.0 * 0.5 * sigma + 1e-6);
  // known value of the cube self-interaction integral II 1/|x-y| ~ 1.88231
  CHECK(2.0 * quad == doctest::Approx(1.88231).epsilon(1e-4));
}

TEST_CASE("cell integrals: generic Duffy machinery vs d=1 closed forms") {
  auto z1 = Lattice::from_name("Z1");
  auto geom = CellGeometry::from_lattice(z1);
  auto w = InteractionKernel::riesz(0.5);
  // self cell: 2/((1-s)(2-s)) = 8/3
  CHECK(cell_pair_integral(geom, {0, 0, 0}, w, 24) == doctest::Approx(8.0 / 3.0).epsilon(1e-10));
  // adjacent cell closed form
  auto G2 = [](double u, double s) { return std::pow(u, 2.0 - s) / ((1.0 - s) * (2.0 - s)); };
  double adj = G2(2, 0.5) - 2 * G2(1, 0.5);
  PairTables t(z1, w, 24);
  t.ensure({{0, 0, 0}, {1, 0, 0}});
  CHECK(t.cell_cell({1, 0, 0}) == doctest::Approx(adj).epsilon(1e-12));
  CHECK(cell_pair_integral(geom, {1, 0, 0}, w, 24) == doctest::Approx(adj).epsilon(1e-8));
}

TEST_CASE("cell integrals: d=3 self cell equals the weighted reduction") {
  auto z3 = Lattice::from_name("Z3");
  auto geom = CellGeometry::from_lattice(z3);
  for (double s : {0.5, 1.0, 1.5}) {
    auto w = InteractionKernel::riesz(s);
    double duffy = cell_pair_integral(geom, {0, 0, 0}, w, 20);
    double reduction = 2.0 * box_self_integral(3, w, 1.0); // same integral, other route
    CHECK(duffy == doctest::Approx(reduction).epsilon(1e-7));
  }
}

TEST_CASE("cell integrals: multipole matches quadrature at the crossover") {
  auto z3 = Lattice::from_name("Z3");
  auto geom = CellGeometry::from_lattice(z3);
  auto w = InteractionKernel::coulomb3d();
  for (std::array<int, 3> z : {std::array<int, 3>{3, 0, 0}, {3, 2, 1}, {2, 2, 2}}) {
    double quad = cell_pair_integral(geom, z, w, 24);
    double err = 0.0;
    double far = cell_pair_far(geom, z, w, &err);
    CHECK(std::abs(far - quad) < 5e-6);
    double quad_pc = point_cell_integral(geom, z, w, 24);
    double far_pc = point_cell_far(geom, z, w, &err);
    CHECK(std::abs(far_pc - quad_pc) < 5e-6);
  }
}

TEST_CASE("coulomb box potential against quadrature") {
  std::array<double, 3> lo{-0.5, -0.5, -0.5}, hi{0.5, 0.5, 0.5};
  // center of the unit cube: known constant ~ 2.3800774
  CHECK(coulomb_box_potential({0, 0, 0}, lo, hi) == doctest::Approx(2.3800774).epsilon(1e-6));
  // generic interior and exterior points vs the Duffy cell integral route
  auto w = InteractionKernel::coulomb3d();
  auto geom = CellGeometry::from_lattice(Lattice::from_name("Z3"));
  for (std::array<int, 3> z : {std::array<int, 3>{1, 0, 0}, {1, 1, 0}, {2, 1, 1}}) {
    double viaq = point_cell_integral(geom, z, w, 20);
    double exact = coulomb_box_potential({double(z[0]), double(z[1]), double(z[2])}, lo, hi);
    CHECK(viaq == doctest::Approx(exact).epsilon(1e-8));
  }
  // off-grid point
  double gq = 0.0;
  {
    const GaussRule& r = gauss_rule(32);
    std::array<double, 3> p{0.9, 0.2, -0.1};
    for (int i = 0; i < 32; ++i)
      for (int j = 0; j < 32; ++j)
        for (int k = 0; k < 32; ++k) {
          double x = 0.5 * r.x[i], y = 0.5 * r.x[j], zc = 0.5 * r.x[k];
          double dx = x - p[0], dy = y - p[1], dz = zc - p[2];
          gq += 0.125 * r.w[i] * r.w[j] * r.w[k] / std::sqrt(dx * dx + dy * dy + dz * dz);
        }
    CHECK(coulomb_box_potential(p, lo, hi) == doctest::Approx(gq).epsilon(1e-4));
  }
}

TEST_CASE("1D crystal energies, exact values") {
  auto z1 = Lattice::from_name("Z1");
  auto na = InteractionKernel::neg_abs();
  // floating crystal with w=-|r| is exactly 1/6 per particle at every L
  for (double L : {3.0, 8.0, 13.0}) {
    auto b = floating_indirect(z1, L, na);
    CHECK(b.per_volume == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  }
  // clamped neutral-background energy tends to -zeta(-1) = +1/12, exact at
  // every L for this kernel
  for (double L : {3.0, 9.0, 17.0}) {
    auto b = jellium_clamped(z1, L, na);
    CHECK(b.per_volume == doctest::Approx(1.0 / 12.0).epsilon(1e-10));
  }
}

TEST_CASE("1D crystal energies, riesz limit") {
  auto z1 = Lattice::from_name("Z1");
  auto w = InteractionKernel::riesz(0.5);
  double zeta_half = epstein_zeta(z1, 0.5, 1e-9).value;
  std::vector<double> Ls{8, 16, 32, 64};
  auto sweep = crystal_sweep(z1, CrystalMode::floating, w, Ls, true);
  CHECK(sweep.limit == doctest::Approx(zeta_half).epsilon(1e-2 / 1.46));
  auto clamped = crystal_sweep(z1, CrystalMode::clamped, w, {8, 16, 32}, true);
  CHECK(clamped.limit == doctest::Approx(zeta_half).epsilon(2e-2 / 1.46));
}

TEST_CASE("modified crystal d=1") {
  auto z1 = Lattice::from_name("Z1");
  // riesz kernels are inside the validity range of the fluid-layer
  // construction: the shift is removed and the limit matches the clamped one
  auto w = InteractionKernel::riesz(0.5);
  auto sr = crystal_sweep(z1, CrystalMode::modified, w, {8, 16, 32, 64}, true);
  double zeta_half = epstein_zeta(z1, 0.5, 1e-9).value;
  CHECK(sr.limit == doctest::Approx(zeta_half).epsilon(2e-2 / 1.46));
  // w = -|r| sits outside that range (the boundary fluid itself carries an
  // O(volume) long-range cost); the construction stays well above the
  // clamped value instead of converging to it
  auto na = InteractionKernel::neg_abs();
  auto sn = crystal_sweep(z1, CrystalMode::modified, na, {16, 32}, false);
  CHECK(sn.values.back() > 0.3);
}

TEST_CASE("floating crystal input validation") {
  auto z1 = Lattice::from_name("Z1");
  CHECK_THROWS_AS(floating_indirect(z1, 4.0, InteractionKernel::riesz(1.0)), InputError);
  auto z3 = Lattice::from_name("Z3");
  CHECK_THROWS_AS(floating_indirect(z3, 12.0, InteractionKernel::coulomb3d()), InputError);
  CHECK_THROWS_AS(floating_modified(z1, 4.0, 0.5, InteractionKernel::riesz(0.5)), InputError);
}

TEST_CASE("spline-weighted cell integrals") {
  auto w = InteractionKernel::riesz(0.5);
  auto g1 = CellGeometry::box({1.0});
  // d=1 closed forms against a graded brute-force quadrature
  auto brute_1d = [&](int n, int z) {
    double acc = 0.0;
    int pieces = 6000;
    double half = 0.5 * n;
    const GaussRule& r = gauss_rule(6);
    for (int i = 0; i < pieces; ++i) {
      double a = -half + (2 * half) * i / pieces, b = a + (2 * half) / pieces;
      double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
      for (int q = 0; q < 6; ++q) {
        double u = mid + hw * r.x[q];
        double au = std::abs(u);
        double bn;
        if (n == 2)
          bn = au <= 1 ? 1 - au : 0;
        else if (n == 3)
          bn = au <= 0.5 ? 0.75 - au * au : (au <= 1.5 ? 0.5 * (1.5 - au) * (1.5 - au) : 0);
        else
          bn = au <= 1 ? 2.0 / 3 - au * au + au * au * au / 2
                       : (au <= 2 ? std::pow(2 - au, 3) / 6.0 : 0);
        double rr = std::abs(z + u);
        if (rr > 1e-10) acc += hw * r.w[q] * bn * std::pow(rr, -0.5);
      }
    }
    return acc;
  };
  for (int n : {2, 3, 4})
    for (int z : {2, 3, 5})
      CHECK(spline_pair_integral(g1, {z, 0, 0}, w, n) ==
            doctest::Approx(brute_1d(n, z)).epsilon(1e-7));

  // d=3: the smeared-combination kernel sums to zero over the lattice for
  // the Coulomb case (its per-axis cumulants cancel)
  auto wc = InteractionKernel::coulomb3d();
  auto g3 = CellGeometry::from_lattice(Lattice::from_name("Z3"));
  double total = 0.0;
  int R = 5;
  for (int zx = -R; zx <= R; ++zx)
    for (int zy = -R; zy <= R; ++zy)
      for (int zz = -R; zz <= R; ++zz) {
        std::array<int, 3> z{zx, zy, zz};
        int zmax = std::max({std::abs(zx), std::abs(zy), std::abs(zz)});
        double i2, i3, i4;
        if (zmax <= 3) {
          i2 = spline_pair_integral(g3, z, wc, 2, 10);
          i3 = spline_pair_integral(g3, z, wc, 3, 10);
          i4 = spline_pair_integral(g3, z, wc, 4, 10);
        } else {
          i2 = spline_pair_far(g3, z, wc, 2);
          i3 = spline_pair_far(g3, z, wc, 3);
          i4 = spline_pair_far(g3, z, wc, 4);
        }
        total += i3 - 0.5 * i4 - 0.5 * i2;
      }
  CHECK(std::abs(total) < 1e-3);
}

TEST_CASE("1d crystal sweep converges monotonically toward the fitted limit") {
  auto z1 = Lattice::from_name("Z1");
  auto w = InteractionKernel::riesz(0.5);
  std::vector<double> Ls{8, 16, 32, 64};
  auto sweep = crystal_sweep(z1, CrystalMode::floating, w, Ls, true);
  for (std::size_t i = 0; i + 1 < Ls.size(); ++i)
    CHECK(std::abs(sweep.values[i + 1] - sweep.limit) <
          std::abs(sweep.values[i] - sweep.limit));
  CHECK(sweep.residual < 5e-4);
}
