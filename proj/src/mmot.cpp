#include "dfl/mmot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dfl/constants.hpp"
#include "dfl/errors.hpp"
#include "dfl/numerics.hpp"
#include "dfl/parallel.hpp"

namespace dfl {

double CouplingPlan::total_mass() const {
  double s = 0.0;
  for (const auto& [t, p] : entries) s += p;
  return s;
}

std::vector<double> CouplingPlan::marginal(std::size_t cells) const {
  std::vector<double> m(cells, 0.0);
  for (const auto& [t, p] : entries)
    for (int c : t) m[c] += p;
  return m;
}

std::vector<double> GrandCanonicalPlan::sector_masses() const {
  std::vector<double> out;
  out.push_back(vacuum_mass);
  for (const auto& s : sectors) out.push_back(s.total_mass());
  return out;
}

int GrandCanonicalPlan::largest_active_sector(double tol) const {
  int best = 0;
  for (std::size_t k = 0; k < sectors.size(); ++k)
    if (sectors[k].total_mass() > tol) best = static_cast<int>(k) + 1;
  return best;
}

namespace {

long long ipow(long long b, int e) {
  long long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

void check_budget(std::size_t cells, int n, long long budget) {
  long long total = 1;
  for (int i = 0; i < n; ++i) {
    total *= static_cast<long long>(cells);
    if (total > budget)
      throw InputError("transport budget exceeded: M^n = " + std::to_string(ipow(cells, n)) +
                       " > " + std::to_string(budget));
  }
}

// sorted tuples (combinations with repetition unless distinct_only)
std::vector<std::vector<int>> enumerate_tuples(int cells, int n, bool distinct_only) {
  std::vector<std::vector<int>> out;
  std::vector<int> t(n, 0);
  if (n == 0) return out;
  if (distinct_only) {
    for (int i = 0; i < n; ++i) {
      if (i >= cells) return out;
      t[i] = i;
    }
  }
  for (;;) {
    out.push_back(t);
    int a = n - 1;
    int cap = cells - 1 - (distinct_only ? (n - 1 - a) : 0);
    while (a >= 0 && t[a] >= cap) {
      --a;
      cap = cells - 1 - (distinct_only ? (n - 1 - a) : 0);
    }
    if (a < 0) break;
    ++t[a];
    for (int b = a + 1; b < n; ++b) t[b] = t[a] + (distinct_only ? (b - a) : 0);
  }
  return out;
}

double tuple_cost(const std::vector<int>& t, const Matrix& c) {
  double s = 0.0;
  for (std::size_t a = 0; a < t.size(); ++a)
    for (std::size_t b = a + 1; b < t.size(); ++b) s += c(t[a], t[b]);
  return s;
}

Matrix cost_matrix(const DiscreteDensity& rho, const InteractionKernel& w, bool& diagonal_ok) {
  diagonal_ok = w.integrable_self(rho.grid().dim());
  return kernel_matrix(rho.grid(), w, /*allow_nonintegrable_diagonal=*/true);
}

} // namespace

MmotResult solve_mmot(const DiscreteDensity& rho, int n, const InteractionKernel& w,
                      const MmotOptions& opt) {
  const std::size_t cells = rho.size();
  if (n < 1) throw InputError("solve_mmot: n >= 1");
  if (std::abs(rho.total_mass() - n) > 1e-9)
    throw InputError("solve_mmot: density mass does not equal the particle number");
  check_budget(cells, n, opt.budget);

  bool diag_ok = true;
  Matrix c = cost_matrix(rho, w, diag_ok);
  const bool distinct = opt.forbid_diagonal || !diag_ok;

  auto tuples = enumerate_tuples(static_cast<int>(cells), n, distinct);
  if (tuples.empty()) throw InputError("solve_mmot: no admissible tuples (too few cells?)");

  std::vector<SparseColumn> cols(tuples.size());
  std::vector<double> costs(tuples.size());
  for (std::size_t j = 0; j < tuples.size(); ++j) {
    const auto& t = tuples[j];
    std::map<int, int> mult;
    for (int cidx : t) ++mult[cidx];
    for (const auto& [cidx, k] : mult) cols[j].entries.push_back({cidx, double(k)});
    costs[j] = tuple_cost(t, c);
  }
  LpResult lp = simplex_solve(static_cast<int>(cells), rho.masses(), cols, costs,
                              opt.max_lp_iterations);
  if (lp.status == LpStatus::infeasible)
    throw InputError("solve_mmot: marginal constraints infeasible on this grid");
  if (lp.status != LpStatus::optimal)
    throw ConvergenceError("solve_mmot: simplex did not reach optimality");

  MmotResult res;
  res.plan.n = n;
  for (std::size_t j = 0; j < tuples.size(); ++j)
    if (lp.x[j] > 0.0) res.plan.entries.push_back({tuples[j], lp.x[j]});
  res.value = lp.objective;
  res.potential.v.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) res.potential.v[i] = -lp.duals[i];
  res.potential.objective = 0.0;
  for (std::size_t i = 0; i < cells; ++i)
    res.potential.objective -= res.potential.v[i] * rho.mass(i);
  res.lp_gap = lp.primal_dual_gap;
  res.iterations = lp.iterations;
  return res;
}

SinkhornResult sinkhorn_mmot(const DiscreteDensity& rho, int n, const InteractionKernel& w,
                             const SinkhornOptions& opt) {
  const int cells = static_cast<int>(rho.size());
  if (std::abs(rho.total_mass() - n) > 1e-9)
    throw InputError("sinkhorn_mmot: density mass does not equal the particle number");
  check_budget(cells, n, opt.budget);
  bool diag_ok = true;
  Matrix c = cost_matrix(rho, w, diag_ok);

  const long long total = ipow(cells, n);
  std::vector<double> logmu(cells);
  for (int i = 0; i < cells; ++i) {
    double mu = rho.mass(i) / double(n);
    logmu[i] = mu > 0 ? std::log(mu) : -std::numeric_limits<double>::infinity();
  }
  // cost over unsorted tuples, +inf marking excluded diagonals
  std::vector<double> cost(total);
  std::vector<int> idx(n);
  double cmax = 0.0;
  for (long long t = 0; t < total; ++t) {
    long long r = t;
    for (int a = 0; a < n; ++a) {
      idx[a] = static_cast<int>(r % cells);
      r /= cells;
    }
    double s = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) s += c(idx[a], idx[b]);
    cost[t] = s;
    if (std::isfinite(s)) cmax = std::max(cmax, std::abs(s));
  }
  if (cmax == 0.0) cmax = 1.0;

  std::vector<std::vector<double>> u(n, std::vector<double>(cells, 0.0));
  SinkhornResult out;
  long long iters = 0;
  double eps = cmax;
  for (int level = 0; level < opt.eps_levels; ++level) {
    out.eps_schedule.push_back(eps);
    bool last_level = (level + 1 >= opt.eps_levels) || (0.5 * eps < opt.eps_min_fraction * cmax);
    for (int it = 0; it < opt.max_iter_per_eps; ++it) {
      double err = 0.0;
      for (int a = 0; a < n; ++a) {
        // log-marginal over axis a
        std::vector<double> lmax(cells, -std::numeric_limits<double>::infinity());
        std::vector<double> acc(cells, 0.0);
        for (long long t = 0; t < total; ++t) {
          if (!std::isfinite(cost[t])) continue;
          long long r = t;
          double lp = -cost[t];
          int ia = 0;
          for (int ax = 0; ax < n; ++ax) {
            int i = static_cast<int>(r % cells);
            r /= cells;
            lp += u[ax][i];
            if (ax == a) ia = i;
          }
          lp /= eps;
          if (lp > lmax[ia]) {
            acc[ia] = acc[ia] * std::exp(lmax[ia] - lp) + 1.0;
            lmax[ia] = lp;
          } else {
            acc[ia] += std::exp(lp - lmax[ia]);
          }
        }
        for (int i = 0; i < cells; ++i) {
          double lmarg = lmax[i] + std::log(std::max(acc[i], 1e-300));
          if (std::isfinite(logmu[i])) {
            u[a][i] += eps * (logmu[i] - lmarg);
            err += std::abs(std::exp(lmarg) - std::exp(logmu[i]));
          } else {
            u[a][i] = -1e30;
          }
        }
        ++iters;
      }
      if (err < opt.marginal_tol) break;
    }
    if (last_level) break;
    eps *= 0.5;
  }
  // final value and marginal error at the last eps
  double value = 0.0, marg_err = 0.0;
  {
    std::vector<double> marg(cells, 0.0);
    for (long long t = 0; t < total; ++t) {
      if (!std::isfinite(cost[t])) continue;
      long long r = t;
      double lp = -cost[t];
      std::vector<int> ids(n);
      for (int ax = 0; ax < n; ++ax) {
        ids[ax] = static_cast<int>(r % cells);
        r /= cells;
        lp += u[ax][ids[ax]];
      }
      double p = std::exp(lp / eps); // plan weight at the final eps
      value += p * cost[t];
      marg[ids[0]] += p;
    }
    for (int i = 0; i < cells; ++i)
      marg_err += std::abs(marg[i] - rho.mass(i) / double(n));
  }
  out.value = value;
  out.marginal_error = marg_err;
  out.iterations = iters;
  if (marg_err > 1e-4)
    throw ConvergenceError("sinkhorn_mmot: marginals did not converge");
  return out;
}

MongeResult monge_1d(const DiscreteDensity& rho, int n, const InteractionKernel& w,
                     int quad_order) {
  const Grid& g = rho.grid();
  if (g.dim() != 1) throw InputError("monge_1d: d = 1 only");
  if (std::abs(rho.total_mass() - n) > 1e-9)
    throw InputError("monge_1d: density mass does not equal the particle number");
  const std::size_t cells = g.size();
  const double h = g.length(0) / double(cells);

  // cumulative mass at cell edges
  std::vector<double> edge(cells + 1, 0.0), cum(cells + 1, 0.0);
  for (std::size_t i = 0; i <= cells; ++i) edge[i] = h * double(i);
  for (std::size_t i = 0; i < cells; ++i) cum[i + 1] = cum[i] + rho.mass(i);

  auto inv_cdf = [&](double mass) -> double {
    // first edge with cum >= mass, linear inside the cell
    auto it = std::lower_bound(cum.begin(), cum.end(), mass);
    std::size_t k = static_cast<std::size_t>(it - cum.begin());
    if (k == 0) return edge[0];
    std::size_t cell = k - 1;
    double dm = mass - cum[cell];
    double mcell = rho.mass(cell);
    if (mcell <= 0.0) return edge[cell + 1];
    return edge[cell] + h * dm / mcell;
  };

  MongeResult out;
  out.splits.resize(n + 1);
  for (int j = 0; j <= n; ++j) out.splits[j] = inv_cdf(double(j));

  // s-breakpoints: fractional parts of the cell-edge cumulative masses
  std::vector<double> sb{0.0, 1.0};
  for (std::size_t i = 1; i < cells; ++i) {
    double f = cum[i] - std::floor(cum[i]);
    if (f > 1e-14 && f < 1.0 - 1e-14) sb.push_back(f);
  }
  std::sort(sb.begin(), sb.end());
  sb.erase(std::unique(sb.begin(), sb.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-14; }),
           sb.end());

  auto positions = [&](double s, std::vector<double>& r) {
    for (int k = 0; k < n; ++k) r[k] = inv_cdf(double(k) + s);
  };

  const GaussRule& rule = gauss_rule(quad_order);
  double value = 0.0;
  std::map<std::vector<int>, double> plan;
  std::vector<double> r(n);
  for (std::size_t seg = 0; seg + 1 < sb.size(); ++seg) {
    double a = sb[seg], b = sb[seg + 1];
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int q = 0; q < quad_order; ++q) {
      positions(mid + half * rule.x[q], r);
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) s += w(std::abs(r[k] - r[j]));
      value += half * rule.w[q] * s;
    }
    // cell tuple on this segment (constant inside)
    positions(mid, r);
    std::vector<int> t(n);
    for (int k = 0; k < n; ++k) {
      long long cidx = static_cast<long long>(std::floor(r[k] / h));
      if (cidx < 0) cidx = 0;
      if (cidx >= static_cast<long long>(cells)) cidx = cells - 1;
      t[k] = static_cast<int>(cidx);
    }
    plan[t] += b - a;
  }
  out.value = value;
  out.plan.n = n;
  for (const auto& [t, p] : plan) out.plan.entries.push_back({t, p});
  {
    bool diag_ok = true;
    Matrix c = cost_matrix(rho, w, diag_ok);
    double pc = 0.0;
    for (const auto& [t, p] : out.plan.entries) pc += tuple_cost(t, c) * p;
    out.plan_cost = pc;
  }
  return out;
}

GcMmotResult solve_gc_mmot(const DiscreteDensity& rho, int n_max, const InteractionKernel& w,
                           const MmotOptions& opt) {
  const std::size_t cells = rho.size();
  if (n_max < 1) throw InputError("solve_gc_mmot: n_max >= 1");
  if (rho.total_mass() > double(n_max) + 1e-9)
    throw InputError("solve_gc_mmot: density mass exceeds n_max");
  bool diag_ok = true;
  Matrix c = cost_matrix(rho, w, diag_ok);
  const bool distinct = opt.forbid_diagonal || !diag_ok;

  std::vector<SparseColumn> cols;
  std::vector<double> costs;
  std::vector<std::pair<int, std::vector<int>>> meta; // sector + tuple
  const int mass_row = static_cast<int>(cells);

  // vacuum column
  cols.push_back({{{mass_row, 1.0}}});
  costs.push_back(0.0);
  meta.push_back({0, {}});

  for (int sec = 1; sec <= n_max; ++sec) {
    check_budget(cells, sec, opt.budget);
    auto tuples = enumerate_tuples(static_cast<int>(cells), sec, distinct);
    for (auto& t : tuples) {
      SparseColumn colv;
      std::map<int, int> mult;
      for (int cidx : t) ++mult[cidx];
      for (const auto& [cidx, k] : mult) colv.entries.push_back({cidx, double(k)});
      colv.entries.push_back({mass_row, 1.0});
      cols.push_back(std::move(colv));
      costs.push_back(tuple_cost(t, c));
      meta.push_back({sec, t});
    }
  }
  std::vector<double> rhs = rho.masses();
  rhs.push_back(1.0);
  LpResult lp = simplex_solve(static_cast<int>(cells) + 1, rhs, cols, costs,
                              opt.max_lp_iterations);
  if (lp.status == LpStatus::infeasible)
    throw InputError("solve_gc_mmot: infeasible marginal");
  if (lp.status != LpStatus::optimal)
    throw ConvergenceError("solve_gc_mmot: simplex did not reach optimality");

  GcMmotResult out;
  out.plan.n_max = n_max;
  out.plan.sectors.assign(n_max, CouplingPlan{});
  for (int s = 0; s < n_max; ++s) out.plan.sectors[s].n = s + 1;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (lp.x[j] <= 0.0) continue;
    const auto& [sec, t] = meta[j];
    if (sec == 0)
      out.plan.vacuum_mass += lp.x[j];
    else
      out.plan.sectors[sec - 1].entries.push_back({t, lp.x[j]});
  }
  out.value = lp.objective;
  out.duals = lp.duals;
  out.lp_gap = lp.primal_dual_gap;
  return out;
}

double hartree(const DiscreteDensity& rho, const InteractionKernel& w) {
  const Grid& g = rho.grid();
  if (!w.integrable_self(g.dim()))
    throw InputError("hartree: kernel self-average diverges (riesz s >= d)");
  const std::size_t cells = rho.size();
  std::vector<double> h(g.dim());
  for (int a = 0; a < g.dim(); ++a) h[a] = g.spacing(a);
  const double diag = cell_self_average(w, h);
  auto row = [&](std::size_t i) {
    double mi = rho.mass(i);
    if (mi == 0.0) return 0.0;
    double s = diag * mi;
    for (std::size_t j = 0; j < cells; ++j) {
      if (j == i) continue;
      double mj = rho.mass(j);
      if (mj == 0.0) continue;
      s += w(g.distance(i, j)) * mj;
    }
    return 0.5 * mi * s;
  };
  return parallel_sum(cells, row);
}

double sce_value(const DiscreteDensity& rho, int n, const InteractionKernel& w, SceMethod method,
                 const MmotOptions& opt) {
  if (method == SceMethod::automatic)
    method = (rho.grid().dim() == 1) ? SceMethod::monge : SceMethod::lp;
  if (method == SceMethod::monge) return monge_1d(rho, n, w).value;
  return solve_mmot(rho, n, w, opt).value;
}

double indirect_energy(const DiscreteDensity& rho, int n, const InteractionKernel& w,
                       SceMethod method, const MmotOptions& opt) {
  return sce_value(rho, n, w, method, opt) - hartree(rho, w);
}

double decorrelated_upper(const DiscreteDensity& rho, int n, const InteractionKernel& w) {
  if (n < 1) throw InputError("decorrelated_upper: n >= 1");
  return (1.0 - 1.0 / double(n)) * hartree(rho, w);
}

double onsager_lower(const DiscreteDensity& rho, const InteractionKernel& w) {
  if (!w.fourier_nonneg())
    throw InputError("onsager_lower: kernel must have a nonnegative Fourier transform");
  double w0 = w.at_zero();
  return hartree(rho, w) - 0.5 * w0 * rho.total_mass();
}

LoRatioReport lieb_oxford_ratio(const DiscreteDensity& rho, const InteractionKernel& w,
                                SceMethod method, const MmotOptions& opt) {
  if (w.kind() != InteractionKernel::Kind::riesz)
    throw InputError("lieb_oxford_ratio: riesz kernels only");
  const int d = rho.grid().dim();
  const double s = w.exponent();
  long long n = std::llround(rho.total_mass());
  if (std::abs(rho.total_mass() - double(n)) > 1e-9)
    throw InputError("lieb_oxford_ratio: integer total mass required");
  double ind = indirect_energy(rho, static_cast<int>(n), w, method, opt);
  double denom = rho.power_integral(1.0 + s / d);
  LoRatioReport rep;
  rep.ratio = -ind / denom;
  if (d == 3 && s == 1.0) {
    auto b = lo_constant_bracket(s, d);
    rep.bracket_lower = b.lower;
    rep.bracket_upper = b.upper;
  }
  return rep;
}

SupportReport verify_support(const CouplingPlan& plan, const KantorovichPotential& pot,
                             const DiscreteDensity& rho, const InteractionKernel& w, double tol,
                             const MmotOptions& opt) {
  const std::size_t cells = rho.size();
  bool diag_ok = true;
  Matrix c = cost_matrix(rho, w, diag_ok);
  const bool distinct = opt.forbid_diagonal || !diag_ok;
  check_budget(cells, plan.n, opt.budget);
  auto tuples = enumerate_tuples(static_cast<int>(cells), plan.n, distinct);

  auto slack = [&](const std::vector<int>& t) {
    double s = tuple_cost(t, c);
    for (int i : t) s += pot.v[i];
    return s;
  };

  SupportReport rep;
  rep.min_tuple_slack = std::numeric_limits<double>::infinity();
  for (const auto& t : tuples) rep.min_tuple_slack = std::min(rep.min_tuple_slack, slack(t));
  rep.max_support_excess = 0.0;
  for (const auto& [t, p] : plan.entries) {
    if (p <= tol) continue;
    rep.mass_checked += p;
    rep.max_support_excess = std::max(rep.max_support_excess, slack(t) - rep.min_tuple_slack);
  }
  rep.ok = rep.max_support_excess <= tol && rep.min_tuple_slack >= -tol;
  return rep;
}

} // namespace dfl
