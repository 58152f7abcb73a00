#include "dfl/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "dfl/bounds.hpp"
#include "dfl/errors.hpp"
#include "dfl/numerics.hpp"
#include "dfl/constants.hpp"
#include "dfl/crystal.hpp"
#include "dfl/fock.hpp"
#include "dfl/mmot.hpp"
#include "dfl/parallel.hpp"
#include "dfl/tgc.hpp"
#include "dfl/zeta.hpp"

namespace dfl {

namespace {

struct Check {
  Json rows = Json::array();
  bool ok = true;
  void add(const std::string& what, double got, double want, double tol) {
    bool pass = std::abs(got - want) <= tol;
    ok = ok && pass;
    Json r;
    r["check"] = what;
    r["value"] = got;
    r["target"] = want;
    r["tolerance"] = tol;
    r["pass"] = pass;
    rows.push_back(r);
  }
  void require(const std::string& what, bool pass, double witness = 0.0) {
    ok = ok && pass;
    Json r;
    r["check"] = what;
    r["value"] = witness;
    r["pass"] = pass;
    rows.push_back(r);
  }
};

double riemann_zeta_alternating(double s) {
  const int n = 40;
  std::vector<double> c(n + 1, 0.0), d(n + 1, 0.0);
  c[0] = 1.0;
  for (int j = 1; j <= n; ++j)
    c[j] = c[j - 1] * (double(n + j - 1) * 4.0 / double(2 * j - 1)) *
           (double(n - j + 1) / double(2 * j));
  double acc = 0.0;
  for (int j = 0; j <= n; ++j) {
    acc += c[j];
    d[j] = n * acc;
  }
  double sum = 0.0;
  for (int k = 0; k < n; ++k)
    sum += ((k % 2 == 0) ? 1.0 : -1.0) * (d[k] - d[n]) / std::pow(k + 1.0, s);
  return -sum / (d[n] * (1.0 - std::pow(2.0, 1.0 - s)));
}

DiscreteDensity smooth_periodic(std::mt19937_64& rng, std::size_t cells, double length,
                                double mass, double amp = 0.4) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int modes = 3;
  std::vector<double> cc(modes), cs(modes);
  for (int m = 0; m < modes; ++m) {
    cc[m] = u(rng) / (m + 1);
    cs[m] = u(rng) / (m + 1);
  }
  Grid g({cells}, {length}, Boundary::periodic);
  std::vector<double> vals(cells);
  double tot = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    double x = (i + 0.5) * length / double(cells);
    double f = 1.0;
    for (int m = 0; m < modes; ++m)
      f += amp / modes *
           (cc[m] * std::cos(2 * M_PI * (m + 1) * x / length) +
            cs[m] * std::sin(2 * M_PI * (m + 1) * x / length));
    vals[i] = std::max(0.05, f);
    tot += vals[i];
  }
  std::vector<double> masses(cells);
  for (std::size_t i = 0; i < cells; ++i) masses[i] = mass * vals[i] / tot;
  return DiscreteDensity(g, masses);
}

DiscreteDensity random_line_density(std::mt19937_64& rng, std::size_t cells, double length,
                                    int n, double cap = 0.95) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (;;) {
    std::vector<double> m(cells);
    double tot = 0.0;
    for (auto& x : m) {
      x = u(rng);
      tot += x;
    }
    bool ok = true;
    for (auto& x : m) {
      x *= double(n) / tot;
      if (x > cap) ok = false;
    }
    if (ok) return DiscreteDensity(Grid::line(cells, length), m);
  }
}

CriterionResult criterion1(const AcceptanceOptions&) {
  CriterionResult res{1, "closed-form constants", false, 0, {}};
  Check c;
  c.add("c_TF(1) = pi^2/6", thomas_fermi_constant(1), M_PI * M_PI / 6.0, 1e-12);
  double ctf3_literal = 0.3 * std::pow(6.0 * M_PI * M_PI, 2.0 / 3.0);
  c.add("c_TF(3) closed forms agree", thomas_fermi_constant(3), ctf3_literal, 1e-10);
  c.add("lieb-narnhofer = (3/5)(9pi/2)^{1/3}", lieb_narnhofer_constant(),
        0.6 * std::pow(4.5 * M_PI, 1.0 / 3.0), 1e-12);
  c.add("lieb-narnhofer decimal", lieb_narnhofer_constant(), 1.4508, 1e-4);
  c.add("c_D(1,3) quadrature vs closed form", dirac_constant(1.0, 3, 32),
        0.75 * std::cbrt(6.0 / M_PI), 5e-4);
  res.passed = c.ok;
  res.details = c.rows;
  return res;
}

CriterionResult criterion2(const AcceptanceOptions&) {
  CriterionResult res{2, "lattice zeta values and orderings", false, 0, {}};
  Check c;
  auto z1 = Lattice::from_name("Z1");
  c.add("zeta_Z1(2) direct", epstein_zeta(z1, 2.0, 1e-11, ZetaMethod::direct).value,
        M_PI * M_PI / 6.0, 1e-10);
  c.add("zeta_Z1(2) ewald", epstein_zeta(z1, 2.0, 1e-9, ZetaMethod::ewald).value,
        M_PI * M_PI / 6.0, 1e-8);
  double zhalf = epstein_zeta(z1, 0.5, 1e-8).value;
  c.add("zeta_Z1(1/2) vs alternating-series oracle", zhalf, riemann_zeta_alternating(0.5), 1e-6);
  c.add("zeta_Z1(1/2) decimal", zhalf, -1.4603545, 1e-6);
  auto bcc = Lattice::from_name("BCC");
  auto fcc = Lattice::from_name("FCC");
  auto z2 = Lattice::from_name("Z2");
  auto tri = Lattice::from_name("TRI");
  double zb1 = epstein_zeta(bcc, 1.0, 1e-8).value;
  c.add("zeta_BCC(1)", zb1, -1.4442, 2e-3);
  double zf1 = epstein_zeta(fcc, 1.0, 1e-8).value;
  c.require("zeta_BCC(1) < zeta_FCC(1)", zb1 < zf1, zf1 - zb1);
  double zb2 = epstein_zeta(bcc, 2.0, 1e-8, ZetaMethod::ewald).value;
  double zf2 = epstein_zeta(fcc, 2.0, 1e-8, ZetaMethod::ewald).value;
  c.require("zeta_FCC(2) < zeta_BCC(2)", zf2 < zb2, zb2 - zf2);
  for (double s : {0.5, 1.0, 1.5}) {
    double zt = epstein_zeta(tri, s, 1e-8).value;
    double zz = epstein_zeta(z2, s, 1e-8).value;
    c.require("zeta_TRI < zeta_Z2 at s=" + std::to_string(s), zt < zz, zz - zt);
  }
  res.passed = c.ok;
  res.details = c.rows;
  return res;
}

CriterionResult criterion3(const AcceptanceOptions&) {
  CriterionResult res{3, "1d crystal energies and the surface shift", false, 0, {}};
  Check c;
  auto z1 = Lattice::from_name("Z1");
  auto na = InteractionKernel::neg_abs();
  std::vector<double> Ls{8, 16, 32, 64, 128};
  auto fl = crystal_sweep(z1, CrystalMode::floating, na, Ls, true);
  c.add("cell-averaged crystal, w=-|r|: fitted limit 1/6", fl.limit, 1.0 / 6.0, 1e-3);
  auto cl = crystal_sweep(z1, CrystalMode::clamped, na, {8, 16, 32, 64}, true);
  // note: the limit is -zeta(-1) = +1/12; the kernel -|r| flips the sign of
  // every riesz-like energy relative to the s = -1 continuation
  c.add("clamped background, w=-|r|: fitted limit -zeta(-1) = 1/12", cl.limit, 1.0 / 12.0, 1e-3);
  auto w = InteractionKernel::riesz(0.5);
  double zeta_half = epstein_zeta(z1, 0.5, 1e-9).value;
  auto fr = crystal_sweep(z1, CrystalMode::floating, w, {8, 16, 32, 64}, true);
  c.add("cell-averaged crystal, s=1/2: fitted limit zeta(1/2)", fr.limit, zeta_half, 1e-2);
  res.passed = c.ok;
  res.details = c.rows;
  return res;
}

CriterionResult criterion4(const AcceptanceOptions& opt) {
  CriterionResult res{4, "d=3 coulomb crystal shift and its removal", false, 0, {}};
  Check c;
  if (!opt.heavy) {
    res.skipped = true;
    res.details = "skipped (heavy runs disabled)";
    return res;
  }
  auto z3 = Lattice::from_name("Z3");
  auto w = InteractionKernel::coulomb3d();
  std::vector<double> Ls{4, 6, 8};
  std::vector<double> diffs, clamped_vals, modified_vals;
  double far_err = 0.0;
  for (double L : Ls) {
    auto flb = floating_indirect(z3, L, w);
    auto clb = jellium_clamped(z3, L, w);
    diffs.push_back(flb.per_volume - clb.per_volume);
    clamped_vals.push_back(clb.per_volume);
    far_err = std::max(far_err, flb.error_estimate / double(flb.N));
  }
  auto dfit = fit_inverse(Ls, diffs);
  c.add("shift [floating - clamped]/N -> pi/6 (5%)", dfit.limit, M_PI / 6.0, 0.05 * M_PI / 6.0);

  std::vector<double> mls{4, 6, 8, 10};
  for (double L : mls) {
    auto mb = floating_modified(z3, L, 2.0, w);
    modified_vals.push_back(mb.per_volume);
  }
  auto cfit = fit_inverse(Ls, clamped_vals);
  // the fluid layer keeps the wrapped crystal boundary-dominated at these
  // sizes; the quadratic-in-1/L model captures the layer corrections
  auto mfit = fit_inverse_quadratic(mls, modified_vals);
  double bar_c = 2.0 * cfit.residual + std::abs(clamped_vals.back() - cfit.limit) + far_err;
  double bar_m = 3.0 * mfit.residual + std::abs(mfit.slope) / (mls.back() * mls.back()) +
                 std::abs(modified_vals.back() - mfit.limit) / double(mls.back()) + far_err + 0.01;
  c.add("fluid-wrapped crystal limit matches the clamped limit", mfit.limit, cfit.limit,
        bar_c + bar_m);
  Json extra;
  extra["clamped_limit"] = cfit.limit;
  extra["modified_limit"] = mfit.limit;
  extra["combined_error_bar"] = bar_c + bar_m;
  extra["zeta_Z3_1"] = epstein_zeta(z3, 1.0, 1e-8).value;
  Json d;
  d["rows"] = c.rows;
  d["extra"] = extra;
  res.passed = c.ok;
  res.details = d;
  return res;
}

CriterionResult criterion5(const AcceptanceOptions& opt) {
  CriterionResult res{5, "transport solver correctness", false, 0, {}};
  Check c;
  std::mt19937_64 rng(opt.seed);
  double worst_monge = 0.0, worst_gap = 0.0, worst_support = 0.0;
  bool support_ok = true;
  for (int t = 0; t < 50; ++t) {
    int cells = 4 + int(rng() % 9); // M <= 12
    int n = 1 + int(rng() % 3);
    double s = (t % 2 == 0) ? 0.5 : 1.0;
    auto rho = random_line_density(rng, cells, 1.0 + 0.25 * cells, n);
    auto w = InteractionKernel::riesz(s);
    auto lp = solve_mmot(rho, n, w);
    auto mg = monge_1d(rho, n, w);
    worst_monge = std::max(worst_monge,
                           std::abs(lp.value - mg.plan_cost) / (1.0 + std::abs(lp.value)));
    worst_gap = std::max(worst_gap, lp.lp_gap / (1.0 + std::abs(lp.value)));
    auto rep = verify_support(lp.plan, lp.potential, rho, w, 1e-7);
    support_ok = support_ok && rep.ok;
    worst_support = std::max(worst_support, rep.max_support_excess);
  }
  c.require("|LP - monge plan| <= 1e-8 (50 instances)", worst_monge <= 1e-8, worst_monge);
  c.require("LP duality gap <= 1e-9 relative", worst_gap <= 1e-9, worst_gap);
  c.require("complementary slackness at 1e-7", support_ok, worst_support);

  // N = 2 brute-force assignment oracle on quarter-unit masses, M <= 6
  double worst_oracle = 0.0;
  for (int t = 0; t < 10; ++t) {
    int cells = 3 + int(rng() % 4);
    std::vector<long long> units(cells, 0);
    long long left = 8;
    for (int i = 0; i < cells - 1 && left > 0; ++i) {
      long long take = std::min<long long>(rng() % 5, left);
      units[i] = take;
      left -= take;
    }
    if (left > 4) {
      --t;
      continue;
    }
    units[cells - 1] = left;
    std::vector<double> m(cells);
    for (int i = 0; i < cells; ++i) m[i] = units[i] / 4.0;
    DiscreteDensity rho(Grid::line(cells, 1.0 + 0.3 * cells), m);
    auto w = InteractionKernel::riesz(0.5);
    auto lp = solve_mmot(rho, 2, w);
    Matrix cm = kernel_matrix(rho.grid(), w, true);
    std::vector<int> tokens;
    for (int i = 0; i < cells; ++i)
      for (long long k = 0; k < units[i]; ++k) tokens.push_back(i);
    std::vector<int> perm(tokens.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = int(i);
    double best = 1e300;
    do {
      double acc = 0.0;
      for (std::size_t i = 0; i < perm.size(); ++i) acc += cm(tokens[i], tokens[perm[i]]);
      best = std::min(best, acc);
    } while (std::next_permutation(perm.begin(), perm.end()));
    worst_oracle = std::max(worst_oracle, std::abs(lp.value - best / 8.0));
  }
  c.require("N=2 equals brute-force vertex enumeration", worst_oracle <= 1e-9, worst_oracle);
  res.passed = c.ok;
  res.details = c.rows;
  return res;
}

CriterionResult criterion6(const AcceptanceOptions& opt) {
  CriterionResult res{6, "classical inequality suite", false, 0, {}};
  Check c;
  std::mt19937_64 rng(opt.seed + 6);
  auto gk = InteractionKernel::gaussian(1.0);
  bool chain_ok = true;
  double worst_slack = 1e300;
  for (int t = 0; t < 20; ++t) {
    int n = 2 + int(rng() % 2);
    auto rho = random_line_density(rng, 5 + int(rng() % 5), 3.0, n);
    double value = solve_mmot(rho, n, gk).value;
    double lo = onsager_lower(rho, gk);
    double hi = decorrelated_upper(rho, n, gk);
    chain_ok = chain_ok && lo <= value + 1e-10 && value <= hi + 1e-10;
    worst_slack = std::min({worst_slack, value - lo, hi - value});
  }
  c.require("onsager <= LP value <= decorrelated (20 gaussian instances)", chain_ok, worst_slack);

  bool negative_ok = true;
  double worst_ind = -1e300;
  for (int t = 0; t < 10; ++t) {
    int n = 2 + int(rng() % 2);
    auto rho = random_line_density(rng, 6 + int(rng() % 5), 4.0, n);
    double ind = indirect_energy(rho, n, InteractionKernel::riesz(0.5), SceMethod::lp);
    negative_ok = negative_ok && ind < -1e-6;
    worst_ind = std::max(worst_ind, ind);
  }
  c.require("indirect energy < 0 beyond 1e-6 (riesz, N >= 2)", negative_ok, worst_ind);

  double zeta_half = epstein_zeta(Lattice::from_name("Z1"), 0.5, 1e-9).value;
  std::vector<double> Ls{4, 8, 16}, ratios;
  for (double L : Ls) {
    Grid g(std::vector<std::size_t>{std::size_t(L) * 256}, {L});
    auto u = density_from_function(g, [](const std::vector<double>&) { return 1.0; });
    ratios.push_back(lieb_oxford_ratio(u, InteractionKernel::riesz(0.5), SceMethod::monge).ratio);
  }
  auto fit = fit_inverse(Ls, ratios);
  c.add("interaction-bound ratio, uniform 1d: limit -zeta(1/2)", fit.limit, -zeta_half, 1e-2);
  res.passed = c.ok;
  res.details = c.rows;
  return res;
}

CriterionResult criterion7(const AcceptanceOptions& opt) {
  CriterionResult res{7, "convex kinetic solver and kinetic inequalities", false, 0, {}};
  Check c;
  std::mt19937_64 rng(opt.seed + 7);

  {
    Grid g({32}, {3.0}, Boundary::periodic);
    auto rho = density_from_function(g, [](const std::vector<double>&) { return 1.0; });
    auto rr = solve_tgc(rho, 1e-8);
    c.add("constant density ring value 4 pi^2/9", rr.value, 4.0 * M_PI * M_PI / 9.0, 1e-6);
  }
  {
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      auto rho = smooth_periodic(rng, 24, 5.0, 1.0);
      auto rr = solve_tgc(rho, 1e-8);
      worst = std::max(worst, std::abs(rr.value - sqrt_gradient_energy(rho)));
    }
    c.require("one-particle equality with the square-root form (20 runs)", worst <= 1e-6, worst);
  }
  {
    Grid g({101}, {101.0}, Boundary::periodic);
    auto ff = free_fermi(g, 1.0);
    c.add("free Fermi energy density at l=101", ff.energy / 101.0, M_PI * M_PI / 6.0, 1e-3);
  }
  {
    // line-setting orbital bound, N <= 6
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      int n = 1 + int(rng() % 6);
      Grid g({48}, {3.0 + n}, Boundary::open);
      auto rho = random_line_density(rng, 48, 3.0 + n, n, 2.0);
      // smooth it: running average to keep the winding well-behaved
      std::vector<double> m = rho.masses();
      for (int pass = 0; pass < 3; ++pass) {
        std::vector<double> sm(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
          double a = m[(i + m.size() - 1) % m.size()], b = m[i], d2 = m[(i + 1) % m.size()];
          sm[i] = 0.25 * a + 0.5 * b + 0.25 * d2;
        }
        m = sm;
      }
      double tot = 0;
      for (double x : m) tot += x;
      for (auto& x : m) x *= double(n) / tot;
      DiscreteDensity sd(g, m);
      auto my = march_young(sd, n);
      double slack = M_PI * M_PI / 6.0 * sd.power_integral(3.0) + my.gradient_term - my.value;
      worst = std::min(worst, slack);
      (void)worst;
    }
    c.require("orbital bound slack >= -1e-8 (20 densities, N <= 6)", worst >= -1e-8, worst);
  }
  {
    // ordering chain on a shared odd-N periodic corpus + universal slacks
    bool order_ok = true, slropes_ok = true;
    double worst_ho = 1e300, worst_lt = 1e300;
    for (int t = 0; t < 6; ++t) {
      int n = 1 + 2 * int(rng() % 3);
      auto rho = smooth_periodic(rng, 32, 2.0 * n + 2.0, double(n), 0.35);
      auto rr = solve_tgc(rho, 1e-7);
      auto my = march_young(rho, n);
      auto lc = layer_cake_dm(rho, 0.5);
      order_ok = order_ok && rr.value <= lc.energy + 1e-8 * (1.0 + lc.energy);
      order_ok = order_ok && rr.value <= my.value + 1e-8 * (1.0 + my.value);
      double rho3 = rho.power_integral(3.0);
      double grad = 2.0 * sqrt_gradient_energy(rho);
      double report_shape = (1.0 + lc.epsilon_theory) * thomas_fermi_constant(1) * rho3 +
                            lc.gradient_coefficient * grad;
      slropes_ok = slropes_ok && lc.energy <= report_shape + 1e-9;
      worst_ho = std::min({worst_ho, hoffmann_ostenhof_slack(rho.grid(), rr.gamma),
               hoffmann_ostenhof_slack(rho.grid(), lc.gamma)});
      if (n >= 3) {
        worst_lt = std::min({worst_lt, lieb_thirring_slack(rho.grid(), rr.gamma),
                 lieb_thirring_slack(rho.grid(), lc.gamma)});
      }
    }
    // localized one-particle states for the kinetic lower bound
    for (int t = 0; t < 4; ++t) {
      Grid g({32}, {8.0}, Boundary::periodic);
      double width = 1.0 + 0.3 * t;
      auto rho = density_from_function(g, [&](const std::vector<double>& x) {
        return std::exp(-width * (x[0] - 4.0) * (x[0] - 4.0));
      });
      std::vector<double> m = rho.masses();
      double tot = rho.total_mass();
      for (auto& v : m) v /= tot;
      DiscreteDensity unit(g, m);
      auto rr = solve_tgc(unit, 1e-8);
      worst_ho = std::min(worst_ho, hoffmann_ostenhof_slack(g, rr.gamma));
      worst_lt = std::min(worst_lt, lieb_thirring_slack(g, rr.gamma));
    }
    {
      Grid g({101}, {101.0}, Boundary::periodic);
      auto ff = free_fermi(g, 1.0);
      worst_ho = std::min(worst_ho, hoffmann_ostenhof_slack(g, ff.gamma));
      worst_lt = std::min(worst_lt, lieb_thirring_slack(g, ff.gamma));
    }
    c.require("ordering chain T_GC <= layer-cake, <= report shape, <= orbital set", order_ok &&
                  slropes_ok,
              0.0);
    c.require("hoffmann-ostenhof slack >= -1e-9 on every produced state", worst_ho >= -1e-9,
              worst_ho);
    c.require("proven-constant kinetic slack >= -1e-9 on every produced state", worst_lt >= -1e-9,
              worst_lt);
  }
  res.passed = c.ok;
  res.details = c.rows;
  return res;
}

CriterionResult criterion8(const AcceptanceOptions& opt) {
  CriterionResult res{8, "lattice duality lab", false, 0, {}};
  Check c;
  std::mt19937_64 rng(opt.seed + 8);
  auto kernel = InteractionKernel::riesz(0.5);

  {
    auto sys = make_ring_system(6, kernel, 0.0);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    std::vector<double> v(6);
    for (auto& x : v) x = u(rng);
    auto gs = sector_ground(sys, v, 2);
    auto dual = levy_lieb_dual(sys, gs.density, DualMode::grand, 1e-7);
    auto kin = tgc_solve_matrix(sys.kinetic, gs.density, 1e-8);
    c.add("noninteracting dual equals the convex kinetic value", dual.dual, kin.value, 1e-6);
  }
  {
    bool ok = true;
    double worst = 1e300;
    bool concave_ok = true, interp_ok = true, convex_rho_ok = true;
    for (int t = 0; t < 20; ++t) {
      auto sys = make_ring_system(5 + int(rng() % 2), kernel, 0.4 + 0.2 * (t % 4));
      int sites = static_cast<int>(sys.grid.size());
      std::uniform_real_distribution<double> u(-0.8, 0.8);
      std::vector<double> v(sites);
      for (auto& x : v) x = u(rng);
      auto gs = sector_ground(sys, v, 2);
      auto grand = levy_lieb_dual(sys, gs.density, DualMode::grand, 1e-6);
      auto canon = levy_lieb_dual(sys, gs.density, DualMode::canonical, 1e-6);
      ok = ok && grand.primal <= canon.primal + grand.gap + canon.gap + 1e-6;
      worst = std::min(worst, canon.primal - grand.primal + grand.gap + canon.gap + 1e-6);
      // concavity of the sector energy in v (midpoint)
      std::vector<double> v2(sites);
      for (auto& x : v2) x = u(rng);
      std::vector<double> mid(sites);
      for (int i = 0; i < sites; ++i) mid[i] = 0.5 * (v[i] + v2[i]);
      for (int n : {1, 2, 3}) {
        double e1 = sector_ground(sys, v, n).energy;
        double e2 = sector_ground(sys, v2, n).energy;
        double em = sector_ground(sys, mid, n).energy;
        concave_ok = concave_ok && em >= 0.5 * (e1 + e2) - 1e-10;
      }
      // theta interpolation whenever the sector energies are convex
      auto rep = convexity_scan(sys, v);
      if (rep.convex) interp_ok = interp_ok && rep.max_interp_error <= 1e-8;
    }
    // convexity in rho (midpoint, primal values with gap slack)
    for (int t = 0; t < 4; ++t) {
      auto sys = make_ring_system(5, kernel, 1.0);
      std::uniform_real_distribution<double> u(-0.8, 0.8);
      std::vector<double> va(5), vb(5);
      for (auto& x : va) x = u(rng);
      for (auto& x : vb) x = u(rng);
      auto ra = sector_ground(sys, va, 2).density;
      auto rb = sector_ground(sys, vb, 2).density;
      std::vector<double> mid(5);
      for (int i = 0; i < 5; ++i) mid[i] = 0.5 * (ra[i] + rb[i]);
      auto fa = levy_lieb_dual(sys, ra, DualMode::grand, 1e-6);
      auto fb = levy_lieb_dual(sys, rb, DualMode::grand, 1e-6);
      auto fm = levy_lieb_dual(sys, mid, DualMode::grand, 1e-6);
      convex_rho_ok = convex_rho_ok &&
                      fm.primal <= 0.5 * (fa.primal + fb.primal) + fa.gap + fb.gap + fm.gap + 1e-6;
    }
    c.require("grand functional below canonical at integer mass (20 instances)", ok, worst);
    c.require("sector energies concave in v (midpoints)", concave_ok, 0.0);
    c.require("quarter-point interpolation on convex instances", interp_ok, 0.0);
    c.require("dual functional convex in the density (midpoints)", convex_rho_ok, 0.0);
  }
  {
    auto sys = make_ring_system(6, kernel, 1.0);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    std::vector<double> v(6);
    for (auto& x : v) x = u(rng);
    auto rho = sector_ground(sys, v, 2).density;
    auto pts = coupling_limits(6, kernel, rho, {0.0, 1000.0}, 1e-6);
    auto kin = tgc_solve_matrix(sys.kinetic, rho, 1e-8);
    c.add("coupling limit g->0", pts[0].value, kin.value, 1e-6);
    DiscreteDensity dens(sys.grid, rho);
    MmotOptions mo;
    mo.forbid_diagonal = true;
    auto gc = solve_gc_mmot(dens, 6, kernel, mo);
    c.add("coupling limit F(g)/g at g=1000 vs lattice transport (2%)",
          pts[1].value / pts[1].g, gc.value, 0.02 * std::abs(gc.value));
  }
  res.passed = c.ok;
  res.details = c.rows;
  return res;
}

CriterionResult criterion9(const AcceptanceOptions&) {
  CriterionResult res{9, "scaling exponents of the optimized error", false, 0, {}};
  Check c;
  Grid g({10, 10, 10}, {2.0, 2.0, 2.0});
  auto prof = density_from_function(g, [](const std::vector<double>& x) {
    double r2 = 0.0;
    for (double cc : x) r2 += (cc - 1.0) * (cc - 1.0);
    return std::exp(-2.0 * r2);
  });
  std::vector<double> m = prof.masses();
  double tot = prof.total_mass();
  for (auto& v : m) v /= tot;
  DiscreteDensity unit(g, m);
  std::vector<double> ns;
  for (int k = 3; k <= 9; ++k) ns.push_back(std::pow(10.0, k));
  auto q = exponent_probe(unit, ns, LdaMode::quantum);
  c.add("quantum error exponent 11/12", q.slope, 11.0 / 12.0, 0.02);
  auto cl = exponent_probe(unit, ns, LdaMode::classical);
  c.add("classical error exponent 5/6", cl.slope, 5.0 / 6.0, 0.02);
  res.passed = c.ok;
  res.details = c.rows;
  return res;
}

// determinism core: every parallel kernel re-run at thread caps {1, all},
// serialized and byte-compared
Json determinism_payload() {
  Json j;
  auto z1 = Lattice::from_name("Z1");
  auto z3 = Lattice::from_name("Z3");
  j["zeta_bcc_1"] = epstein_zeta(Lattice::from_name("BCC"), 1.0, 1e-8).value;
  j["zeta_z1_half"] = epstein_zeta(z1, 0.5, 1e-8).value;
  auto fl = crystal_sweep(z1, CrystalMode::floating, InteractionKernel::riesz(0.5), {8, 16, 32},
                          true);
  j["crystal_1d"] = fl.values;
  j["crystal_1d_limit"] = fl.limit;
  auto f3 = floating_indirect(z3, 4.0, InteractionKernel::coulomb3d());
  j["crystal_3d_L4"] = f3.per_volume;
  auto m3 = floating_modified(z3, 4.0, 2.0, InteractionKernel::coulomb3d());
  j["modified_3d_L4"] = m3.per_volume;
  std::mt19937_64 rng(4242);
  auto rho = random_line_density(rng, 8, 3.0, 2);
  j["mmot_value"] = solve_mmot(rho, 2, InteractionKernel::riesz(0.5)).value;
  j["hartree"] = hartree(rho, InteractionKernel::riesz(0.5))
      ;
  auto srho = smooth_periodic(rng, 24, 6.0, 2.0);
  j["tgc_value"] = solve_tgc(srho, 1e-7).value;
  return j;
}

CriterionResult criterion10(const AcceptanceOptions&) {
  CriterionResult res{10, "bit-reproducibility across thread counts", false, 0, {}};
  int saved = thread_cap();
  set_thread_cap(1);
  std::string one = determinism_payload().dump();
  set_thread_cap(0);
  std::string all = determinism_payload().dump();
  std::string again = determinism_payload().dump();
  set_thread_cap(saved);
  Check c;
  c.require("single-thread and all-thread payloads byte-identical", one == all);
  c.require("repeated run byte-identical", all == again);
  Json d;
  d["rows"] = c.rows;
  d["payload"] = Json::parse(all);
  res.passed = c.ok;
  res.details = d;
  return res;
}

} // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  switch (id) {
    case 1: r = criterion1(opt); break;
    case 2: r = criterion2(opt); break;
    case 3: r = criterion3(opt); break;
    case 4: r = criterion4(opt); break;
    case 5: r = criterion5(opt); break;
    case 6: r = criterion6(opt); break;
    case 7: r = criterion7(opt); break;
    case 8: r = criterion8(opt); break;
    case 9: r = criterion9(opt); break;
    case 10: r = criterion10(opt); break;
    default: throw InputError("unknown acceptance criterion " + std::to_string(id));
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

Json AcceptanceReport::to_json(bool include_timing) const {
  Json j;
  Json arr = Json::array();
  for (const auto& c : criteria) {
    Json e;
    e["id"] = c.id;
    e["name"] = c.name;
    e["pass"] = c.passed;
    if (c.skipped) e["skipped"] = true;
    if (include_timing) e["wall_time_s"] = c.seconds;
    e["details"] = c.details;
    arr.push_back(e);
  }
  j["criteria"] = arr;
  j["all_pass"] = all_passed;
  return j;
}

AcceptanceReport run_acceptance(const AcceptanceOptions& opt, bool verbose) {
  AcceptanceReport rep;
  rep.all_passed = true;
  for (int id = 1; id <= 10; ++id) {
    auto r = run_criterion(id, opt);
    if (!r.skipped) rep.all_passed = rep.all_passed && r.passed;
    if (verbose)
      std::printf("[%s] %2d %-55s (%.2f s)\n", r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL"),
                  r.id, r.name.c_str(), r.seconds);
    rep.criteria.push_back(std::move(r));
  }
  return rep;
}

} // namespace dfl
