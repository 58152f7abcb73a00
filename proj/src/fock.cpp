#include "dfl/fock.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dfl/errors.hpp"
#include "dfl/mmot.hpp"
#include "dfl/numerics.hpp"
#include "dfl/simplex.hpp"
#include "dfl/tgc.hpp"

namespace dfl {

namespace {

long long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

int parity_below(unsigned mask, int site) {
  unsigned below = mask & ((1u << site) - 1u);
  return __builtin_popcount(below) % 2 == 0 ? 1 : -1;
}

} // namespace

LatticeSystem make_ring_system(int sites, const InteractionKernel& w, double coupling) {
  if (sites < 1 || sites > 12) throw InputError("make_ring_system: 1 <= sites <= 12");
  for (int n = 0; n <= sites; ++n)
    if (binom(sites, n) > 924) throw InputError("make_ring_system: sector dimension above 924");
  Grid grid({std::size_t(sites)}, {double(sites)}, Boundary::periodic);
  LatticeSystem sys{grid, kinetic_matrix(grid), kernel_matrix(grid, w, true), coupling};
  return sys;
}

std::vector<unsigned> sector_basis(int sites, int n) {
  std::vector<unsigned> out;
  for (unsigned mask = 0; mask < (1u << sites); ++mask)
    if (__builtin_popcount(mask) == n) out.push_back(mask);
  return out;
}

Matrix sector_hamiltonian(const LatticeSystem& sys, const std::vector<double>& v, int n) {
  const int sites = static_cast<int>(sys.grid.size());
  auto basis = sector_basis(sites, n);
  std::map<unsigned, int> index;
  for (std::size_t a = 0; a < basis.size(); ++a) index[basis[a]] = static_cast<int>(a);

  Matrix h(basis.size(), basis.size());
  for (std::size_t a = 0; a < basis.size(); ++a) {
    unsigned b = basis[a];
    double diag = 0.0;
    for (int i = 0; i < sites; ++i) {
      if (!(b & (1u << i))) continue;
      diag += sys.kinetic(i, i) + v[i];
      for (int j = i + 1; j < sites; ++j)
        if (b & (1u << j)) diag += sys.coupling * sys.pair_w(i, j);
    }
    h(a, a) = diag;
    // hops c_i^dag c_j
    for (int j = 0; j < sites; ++j) {
      if (!(b & (1u << j))) continue;
      for (int i = 0; i < sites; ++i) {
        if (i == j || (b & (1u << i))) continue;
        unsigned b1 = b & ~(1u << j);
        int sign = parity_below(b, j) * parity_below(b1, i);
        unsigned b2 = b1 | (1u << i);
        h(index[b2], a) += sign * sys.kinetic(i, j);
      }
    }
  }
  return h;
}

SectorGround sector_ground(const LatticeSystem& sys, const std::vector<double>& v, int n) {
  const int sites = static_cast<int>(sys.grid.size());
  SectorGround out;
  out.density.assign(sites, 0.0);
  if (n == 0) return out;
  auto basis = sector_basis(sites, n);
  Matrix h = sector_hamiltonian(sys, v, n);
  auto es = symmetric_eigen(h);
  out.energy = es.values[0];
  double scale = std::max(1.0, std::abs(out.energy));
  int deg = 0;
  for (std::size_t j = 0; j < es.values.size() && es.values[j] <= out.energy + 1e-10 * scale; ++j)
    ++deg;
  out.degeneracy = deg;
  for (int j = 0; j < deg; ++j)
    for (std::size_t a = 0; a < basis.size(); ++a) {
      double w2 = es.vectors(a, j) * es.vectors(a, j) / double(deg);
      unsigned mask = basis[a];
      for (int i = 0; i < sites; ++i)
        if (mask & (1u << i)) out.density[i] += w2;
    }
  return out;
}

SpectrumTable sector_energies(const LatticeSystem& sys, const std::vector<double>& v) {
  const int sites = static_cast<int>(sys.grid.size());
  SpectrumTable t;
  for (int n = 0; n <= sites; ++n) {
    if (n == 0) {
      t.energies.push_back(0.0);
      t.degeneracies.push_back(1);
      continue;
    }
    auto g = sector_ground(sys, v, n);
    t.energies.push_back(g.energy);
    t.degeneracies.push_back(g.degeneracy);
  }
  return t;
}

double gc_hull_energy(const std::vector<double>& energies, double lambda) {
  const int m = static_cast<int>(energies.size()) - 1;
  if (lambda < -1e-12 || lambda > m + 1e-12) throw InputError("gc_hull_energy: lambda out of range");
  // lower convex hull by monotone chain over (n, E_n)
  std::vector<int> hull;
  for (int n = 0; n <= m; ++n) {
    while (hull.size() >= 2) {
      int a = hull[hull.size() - 2], b = hull[hull.size() - 1];
      double cross = (double(b - a)) * (energies[n] - energies[a]) -
                     (double(n - a)) * (energies[b] - energies[a]);
      if (cross <= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(n);
  }
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    int a = hull[k], b = hull[k + 1];
    if (lambda >= a - 1e-12 && lambda <= b + 1e-12) {
      double t = (lambda - a) / double(b - a);
      return (1.0 - t) * energies[a] + t * energies[b];
    }
  }
  return energies[hull.back()];
}

ConvexityReport convexity_scan(const LatticeSystem& sys, const std::vector<double>& v) {
  ConvexityReport rep;
  rep.energies = sector_energies(sys, v).energies;
  const int m = static_cast<int>(rep.energies.size()) - 1;
  for (int n = 1; n < m; ++n) {
    double viol = rep.energies[n] - 0.5 * (rep.energies[n - 1] + rep.energies[n + 1]);
    if (viol > 1e-10) {
      rep.convex = false;
      rep.max_violation = std::max(rep.max_violation, viol);
    }
  }
  if (rep.convex) {
    for (int n = 0; n < m; ++n)
      for (double theta : {0.25, 0.5, 0.75}) {
        double hull = gc_hull_energy(rep.energies, n + theta);
        double lin = (1.0 - theta) * rep.energies[n] + theta * rep.energies[n + 1];
        rep.max_interp_error = std::max(rep.max_interp_error, std::abs(hull - lin));
      }
  }
  return rep;
}

namespace {

struct GibbsState {
  double value = 0.0;
  std::vector<double> grad;
};

// smoothed dual value -tau log Z - <v, rho> and its gradient; sectors holds
// the admissible particle numbers
GibbsState gibbs_dual(const LatticeSystem& sys, const std::vector<double>& rho,
                      const std::vector<int>& sectors, const std::vector<double>& v, double tau) {
  const int sites = static_cast<int>(sys.grid.size());
  GibbsState st;
  st.grad.assign(sites, 0.0);

  struct SectorEig {
    int n;
    std::vector<unsigned> basis;
    EigenSystem es;
  };
  std::vector<SectorEig> eigs;
  double emin = 1e300;
  for (int n : sectors) {
    SectorEig se;
    se.n = n;
    if (n == 0) {
      se.es.values = {0.0};
      eigs.push_back(std::move(se));
      emin = std::min(emin, 0.0);
      continue;
    }
    se.basis = sector_basis(sites, n);
    se.es = symmetric_eigen(sector_hamiltonian(sys, v, n));
    emin = std::min(emin, se.es.values[0]);
    eigs.push_back(std::move(se));
  }
  double z = 0.0;
  for (const auto& se : eigs)
    for (std::size_t j = 0; j < se.es.values.size(); ++j) {
      double wgt = std::exp(-(se.es.values[j] - emin) / tau);
      if (wgt < 1e-300) continue;
      z += wgt;
      if (se.n == 0) continue;
      for (std::size_t a = 0; a < se.basis.size(); ++a) {
        double amp = se.es.vectors(a, j);
        if (amp == 0.0) continue;
        double w2 = wgt * amp * amp;
        unsigned mask = se.basis[a];
        for (int i = 0; i < sites; ++i)
          if (mask & (1u << i)) st.grad[i] += w2;
      }
    }
  for (int i = 0; i < sites; ++i) st.grad[i] = st.grad[i] / z - rho[i];
  st.value = emin - tau * std::log(z);
  for (int i = 0; i < sites; ++i) st.value -= v[i] * rho[i];
  return st;
}

} // namespace

FockDualResult levy_lieb_dual(const LatticeSystem& sys, const std::vector<double>& rho,
                              DualMode mode, double tol) {
  const int sites = static_cast<int>(sys.grid.size());
  if (static_cast<int>(rho.size()) != sites) throw InputError("levy_lieb_dual: size mismatch");
  double mass = 0.0;
  for (double r : rho) {
    if (r < -1e-12 || r > 1.0 + 1e-12)
      throw InputError("levy_lieb_dual: site occupations must lie in [0,1]");
    mass += r;
  }
  std::vector<int> sectors;
  if (mode == DualMode::canonical) {
    long long n = std::llround(mass);
    if (std::abs(mass - double(n)) > 1e-9)
      throw InputError("levy_lieb_dual: canonical mode needs integer mass");
    sectors.push_back(static_cast<int>(n));
  } else {
    if (mass > sites + 1e-9) throw InputError("levy_lieb_dual: mass exceeds the site count");
    for (int n = 0; n <= sites; ++n) sectors.push_back(n);
  }

  // spectral scale for the annealing schedule
  double scale = 0.0;
  for (int i = 0; i < sites; ++i) scale = std::max(scale, std::abs(sys.kinetic(i, i)));
  for (int i = 0; i < sites; ++i)
    for (int j = i + 1; j < sites; ++j)
      scale = std::max(scale, std::abs(sys.coupling * sys.pair_w(i, j)));
  scale = std::max(scale, 1.0);

  FockDualResult out;
  std::vector<double> v(sites, 0.0);
  long long evals = 0;
  double tau = scale;
  const double tau_min = 1e-9 * scale;
  for (;;) {
    auto objective = [&](const std::vector<double>& vv, std::vector<double>& grad) {
      ++evals;
      auto st = gibbs_dual(sys, rho, sectors, vv, tau);
      grad = st.grad;
      return st.value;
    };
    double stage_tol = std::max(1e-11, std::min(1e-5, 1e-4 * tau / scale));
    bfgs_maximize(v, objective, stage_tol, tau <= 4.0 * tau_min ? 1200 : 300);
    if (tau <= tau_min * 1.0000001) break;
    tau = std::max(0.5 * tau, tau_min);
  }
  out.iterations = evals;
  out.v = v;

  // exact dual at tau = 0
  SpectrumTable table = sector_energies(sys, v);
  double evmin = 1e300;
  if (mode == DualMode::canonical)
    evmin = table.energies[sectors[0]];
  else
    for (int n : sectors) evmin = std::min(evmin, table.energies[n]);
  out.dual = evmin;
  for (int i = 0; i < sites; ++i) out.dual -= v[i] * rho[i];

  // primal mixture from low-lying eigenstate densities
  struct Candidate {
    double intrinsic;
    std::vector<double> density;
    int sector;
  };
  std::vector<Candidate> cands;
  const double window = std::max(1e-6 * scale, 1e-8);
  for (int n : sectors) {
    if (n == 0) {
      if (mode == DualMode::grand) cands.push_back({0.0, std::vector<double>(sites, 0.0), 0});
      continue;
    }
    auto basis = sector_basis(sites, n);
    auto es = symmetric_eigen(sector_hamiltonian(sys, v, n));
    for (std::size_t j = 0; j < es.values.size() && j < 8; ++j) {
      // keep the near-degenerate ground set, plus a few excited states that
      // sometimes help the mixture close the marginal
      if (mode == DualMode::grand && es.values[j] > evmin + window && j >= 4) break;
      std::vector<double> dens(sites, 0.0);
      for (std::size_t a = 0; a < basis.size(); ++a) {
        double w2 = es.vectors(a, j) * es.vectors(a, j);
        unsigned mask = basis[a];
        for (int i = 0; i < sites; ++i)
          if (mask & (1u << i)) dens[i] += w2;
      }
      double vrho = 0.0;
      for (int i = 0; i < sites; ++i) vrho += v[i] * dens[i];
      cands.push_back({es.values[j] - vrho, dens, n});
    }
  }
  // LP: min sum alpha e + BIG * deviation, alpha a probability vector
  {
    const int rows = sites + 1;
    std::vector<double> rhs(rho);
    rhs.push_back(1.0);
    std::vector<SparseColumn> cols;
    std::vector<double> costs;
    const double big = 1e8 * scale;
    for (const auto& c : cands) {
      SparseColumn col;
      for (int i = 0; i < sites; ++i)
        if (c.density[i] > 1e-300) col.entries.push_back({i, c.density[i]});
      col.entries.push_back({sites, 1.0});
      cols.push_back(col);
      costs.push_back(c.intrinsic);
    }
    for (int i = 0; i < sites; ++i) {
      cols.push_back({{{i, 1.0}}});
      costs.push_back(big);
      cols.push_back({{{i, -1.0}}});
      costs.push_back(big);
    }
    auto lp = simplex_solve(rows, rhs, cols, costs);
    if (lp.status == LpStatus::optimal) {
      double primal = 0.0, resid = 0.0;
      std::map<int, double> weights;
      for (std::size_t j = 0; j < cands.size(); ++j) {
        primal += lp.x[j] * cands[j].intrinsic;
        weights[cands[j].sector] += lp.x[j];
      }
      for (std::size_t j = cands.size(); j < cols.size(); ++j) resid += lp.x[j];
      out.primal = primal;
      out.mixture_residual = resid;
      out.sector_weights.assign(sites + 1, 0.0);
      for (const auto& [n, wgt] : weights) out.sector_weights[n] = wgt;
    } else {
      out.primal = out.dual;
      out.mixture_residual = 1.0;
    }
  }
  out.gap = out.primal - out.dual;
  out.converged =
      out.mixture_residual < 1e-6 && out.gap <= tol * (1.0 + std::abs(out.primal)) + 1e-4;
  return out;
}

std::vector<CouplingPoint> coupling_limits(int sites, const InteractionKernel& w,
                                           const std::vector<double>& rho,
                                           const std::vector<double>& g_list, double tol) {
  std::vector<CouplingPoint> out;
  for (double g : g_list) {
    CouplingPoint p;
    p.g = g;
    if (g == 0.0) {
      // one-body problem, solved exactly by the convex kinetic solver
      LatticeSystem sys = make_ring_system(sites, w, 0.0);
      auto res = tgc_solve_matrix(sys.kinetic, rho, 1e-8);
      p.value = res.value;
      p.gap = res.report.gap;
    } else {
      // F(K, gW) = g F(K/g, W): run the better-conditioned form
      LatticeSystem sys = make_ring_system(sites, w, 1.0);
      for (std::size_t i = 0; i < sys.grid.size(); ++i)
        for (std::size_t j = 0; j < sys.grid.size(); ++j) sys.kinetic(i, j) /= g;
      auto res = levy_lieb_dual(sys, rho, DualMode::grand, tol);
      p.value = g * res.dual;
      p.gap = g * res.gap;
    }
    out.push_back(p);
  }
  return out;
}

XcReport exchange_correlation_gc(const LatticeSystem& sys, const std::vector<double>& rho,
                                 const InteractionKernel& w, double tol) {
  auto full = levy_lieb_dual(sys, rho, DualMode::grand, tol);
  auto kin = tgc_solve_matrix(sys.kinetic, rho, 1e-8);
  DiscreteDensity dens(sys.grid, rho);
  double eh = sys.coupling * hartree(dens, w);
  XcReport rep;
  rep.value = full.dual - kin.value - eh;
  rep.uncertainty = std::abs(full.gap) + std::abs(kin.report.gap);
  return rep;
}

} // namespace dfl
