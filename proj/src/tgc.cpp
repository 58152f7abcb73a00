#include "dfl/tgc.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "dfl/constants.hpp"
#include "dfl/errors.hpp"
#include "dfl/numerics.hpp"
#include "dfl/simplex.hpp"

namespace dfl {

namespace {

std::vector<std::vector<double>> axis_momenta(const Grid& g) {
  std::vector<std::vector<double>> ks(g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    std::size_t m = g.cells(a);
    ks[a].resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      long long signed_m = static_cast<long long>(j);
      if (signed_m > static_cast<long long>(m) / 2) signed_m -= static_cast<long long>(m);
      ks[a][j] = 2.0 * M_PI * double(signed_m) / g.length(a);
    }
  }
  return ks;
}

} // namespace

std::vector<double> momentum_sq_list(const Grid& grid) {
  auto ks = axis_momenta(grid);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto multi = grid.unravel(i);
    double k2 = 0.0;
    for (int a = 0; a < grid.dim(); ++a) k2 += ks[a][multi[a]] * ks[a][multi[a]];
    out[i] = k2;
  }
  return out;
}

Matrix kinetic_matrix(const Grid& grid) {
  if (grid.boundary() != Boundary::periodic)
    throw InputError("kinetic_matrix: periodic grid required");
  const std::size_t n = grid.size();
  auto ks = axis_momenta(grid);
  auto k2 = momentum_sq_list(grid);
  // kernel over index differences
  std::vector<double> kern(n, 0.0);
  for (std::size_t didx = 0; didx < n; ++didx) {
    auto dmulti = grid.unravel(didx);
    double acc = 0.0;
    for (std::size_t mode = 0; mode < n; ++mode) {
      auto mm = grid.unravel(mode);
      double phase = 0.0;
      for (int a = 0; a < grid.dim(); ++a)
        phase += ks[a][mm[a]] * double(dmulti[a]) * grid.spacing(a);
      acc += 0.5 * k2[mode] * std::cos(phase);
    }
    kern[didx] = acc / double(n);
  }
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto mi = grid.unravel(i);
    for (std::size_t j = 0; j < n; ++j) {
      auto mj = grid.unravel(j);
      std::vector<std::size_t> dm(grid.dim());
      for (int a = 0; a < grid.dim(); ++a) {
        std::size_t ma = grid.cells(a);
        dm[a] = (mi[a] + ma - mj[a]) % ma;
      }
      k(i, j) = kern[grid.ravel(dm)];
    }
  }
  return k;
}

double sqrt_gradient_energy(const DiscreteDensity& rho) {
  const Grid& g = rho.grid();
  if (g.boundary() != Boundary::periodic)
    throw InputError("sqrt_gradient_energy: periodic grid required");
  Matrix k = kinetic_matrix(g);
  std::vector<double> u(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) u[i] = std::sqrt(rho.mass(i));
  return quad_form(k, u);
}

namespace {

bool cholesky_solve(std::vector<double> a, int n, std::vector<double>& x) {
  // in-place lower Cholesky of a (row-major) then solve; x holds rhs on entry
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (s <= 0.0) return false;
        a[i * n + i] = std::sqrt(s);
      } else {
        a[i * n + j] = s / a[j * n + j];
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    double s = x[i];
    for (int k = 0; k < i; ++k) s -= a[i * n + k] * x[k];
    x[i] = s / a[i * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = i + 1; k < n; ++k) s -= a[k * n + i] * x[k];
    x[i] = s / a[i * n + i];
  }
  return true;
}

double fermi_occupation(double lambda, double tau) {
  double z = lambda / tau;
  if (z > 500.0) return 0.0;
  if (z < -500.0) return 1.0;
  return 1.0 / (1.0 + std::exp(z));
}

double smoothed_negative_part(double lambda, double tau) {
  // -tau log(1 + exp(-lambda/tau)), overflow safe
  double z = lambda / tau;
  if (z > 500.0) return 0.0;
  if (z < -500.0) return lambda;
  return -tau * std::log1p(std::exp(-z));
}

struct DualState {
  EigenSystem es;
  double value = 0.0;
  std::vector<double> grad;
};

DualState eval_dual(const Matrix& ksub, const std::vector<double>& m, const std::vector<double>& v,
                    double tau) {
  const int n = static_cast<int>(m.size());
  Matrix h = ksub;
  for (int i = 0; i < n; ++i) h(i, i) += v[i];
  DualState st;
  st.es = symmetric_eigen(h);
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += smoothed_negative_part(st.es.values[j], tau);
  for (int i = 0; i < n; ++i) acc -= v[i] * m[i];
  st.value = acc;
  st.grad.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double f = fermi_occupation(st.es.values[j], tau);
    if (f == 0.0) continue;
    for (int i = 0; i < n; ++i) st.grad[i] += f * st.es.vectors(i, j) * st.es.vectors(i, j);
  }
  for (int i = 0; i < n; ++i) st.grad[i] -= m[i];
  return st;
}

// linear-response matrix chi = d(diag occupation)/dv; negative semidefinite
std::vector<double> response_matrix(const DualState& st, double tau) {
  const int n = static_cast<int>(st.grad.size());
  std::vector<double> chi(n * n, 0.0);
  std::vector<double> f(n);
  for (int j = 0; j < n; ++j) f[j] = fermi_occupation(st.es.values[j], tau);
  std::vector<double> uab(n);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      double dl = st.es.values[a] - st.es.values[b];
      double q;
      if (std::abs(dl) < 1e-12 * tau + 1e-300)
        q = -f[a] * (1.0 - f[a]) / tau;
      else
        q = (f[a] - f[b]) / dl;
      if (q == 0.0) continue;
      double w = (a == b) ? q : 2.0 * q;
      for (int i = 0; i < n; ++i) uab[i] = st.es.vectors(i, a) * st.es.vectors(i, b);
      for (int i = 0; i < n; ++i) {
        double wi = w * uab[i];
        if (wi == 0.0) continue;
        for (int j = 0; j < n; ++j) chi[i * n + j] += wi * uab[j];
      }
    }
  }
  return chi;
}

} // namespace

TgcResult tgc_solve_matrix(const Matrix& k, const std::vector<double>& masses, double tol,
                           const TgcOptions& opt) {
  const std::size_t total = masses.size();
  if (k.rows() != total) throw InputError("tgc_solve_matrix: size mismatch");
  if (total > opt.max_sites) throw InputError("tgc_solve_matrix: site budget exceeded");
  for (double m : masses)
    if (m < -1e-12 || m > 1.0 + 1e-12)
      throw InputError("tgc_solve_matrix: cell masses must lie in [0,1] (refine the grid)");

  TgcResult out;
  out.gamma = Matrix(total, total);

  std::vector<std::size_t> sup;
  for (std::size_t i = 0; i < total; ++i)
    if (masses[i] > 0.0) sup.push_back(i);
  out.report.support = sup;
  const int n = static_cast<int>(sup.size());
  if (n == 0) {
    out.report.converged = true;
    return out;
  }

  Matrix ksub(n, n);
  std::vector<double> m(n);
  for (int i = 0; i < n; ++i) {
    m[i] = std::min(1.0, std::max(0.0, masses[sup[i]]));
    for (int j = 0; j < n; ++j) ksub(i, j) = k(sup[i], sup[j]);
  }

  // spectral scale for temperatures and degeneracy windows
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(ksub(i, i)));
  scale = std::max(scale, 1.0);

  std::vector<double> v(n, 0.0);
  long long iters = 0;
  const bool use_newton = n <= 140;
  double tau = opt.tau_start * scale;
  for (;;) {
    out.report.temperature_trace.push_back(tau);
    double stage_tol = std::max(1e-12, std::min(1e-4, 1e-3 * tau / scale));
    if (tau <= opt.tau_min * 1.0000001) stage_tol = 1e-12;
    if (use_newton) {
      DualState st = eval_dual(ksub, m, v, tau);
      for (int it = 0; it < opt.max_newton_per_stage; ++it) {
        ++iters;
        double gn = 0.0;
        for (double gi : st.grad) gn = std::max(gn, std::abs(gi));
        if (gn <= stage_tol) break;
        auto chi = response_matrix(st, tau);
        // ascent: solve (-chi + mu I) dv = grad
        double mu = 1e-12 * scale;
        std::vector<double> dv;
        for (int trial = 0; trial < 30; ++trial) {
          std::vector<double> a(chi.size());
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              a[i * n + j] = -chi[i * n + j] + (i == j ? mu : 0.0);
          dv = st.grad;
          if (cholesky_solve(std::move(a), n, dv)) break;
          mu *= 10.0;
          dv.clear();
        }
        if (dv.empty()) break;
        // line search
        double step = 1.0;
        DualState next;
        bool ok = false;
        for (int ls = 0; ls < 50; ++ls) {
          std::vector<double> vn(n);
          for (int i = 0; i < n; ++i) vn[i] = v[i] + step * dv[i];
          next = eval_dual(ksub, m, vn, tau);
          if (next.value > st.value - 1e-15 * (1.0 + std::abs(st.value))) {
            v = vn;
            ok = true;
            break;
          }
          step *= 0.5;
        }
        if (!ok) break;
        st = std::move(next);
      }
    } else {
      auto objective = [&](const std::vector<double>& vv, std::vector<double>& grad) {
        ++iters;
        DualState st = eval_dual(ksub, m, vv, tau);
        grad = st.grad;
        return st.value;
      };
      bfgs_maximize(v, objective, stage_tol, 400);
    }
    if (tau <= opt.tau_min * 1.0000001) break;
    tau = std::max(0.5 * tau, opt.tau_min);
  }
  out.report.iterations = iters;
  out.report.v = v;

  // exact dual value at tau = 0
  DualState fin = eval_dual(ksub, m, v, opt.tau_min);
  double dual = 0.0;
  for (int j = 0; j < n; ++j) dual += std::min(0.0, fin.es.values[j]);
  for (int i = 0; i < n; ++i) dual -= v[i] * m[i];
  out.report.dual = dual;

  // primal: fill, resolve the near-degenerate shell by a small LP, then an
  // exact-marginal diagonal repair
  const double deg = std::max(1e3 * opt.tau_min, 1e-10) * scale;
  std::vector<int> filled, shell;
  for (int j = 0; j < n; ++j) {
    if (fin.es.values[j] < -deg)
      filled.push_back(j);
    else if (fin.es.values[j] <= deg)
      shell.push_back(j);
  }
  Matrix gsub(n, n);
  for (int j : filled)
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) gsub(i, l) += fin.es.vectors(i, j) * fin.es.vectors(l, j);

  if (!shell.empty()) {
    const int ns = static_cast<int>(shell.size());
    std::vector<double> rhs(n + ns);
    for (int i = 0; i < n; ++i) rhs[i] = m[i] - gsub(i, i);
    for (int j = 0; j < ns; ++j) rhs[n + j] = 1.0;
    std::vector<SparseColumn> cols;
    std::vector<double> costs;
    for (int j = 0; j < ns; ++j) { // occupation variables
      SparseColumn c;
      for (int i = 0; i < n; ++i) {
        double u2 = fin.es.vectors(i, shell[j]) * fin.es.vectors(i, shell[j]);
        if (u2 > 1e-300) c.entries.push_back({i, u2});
      }
      c.entries.push_back({n + j, 1.0});
      cols.push_back(c);
      costs.push_back(0.0);
    }
    for (int j = 0; j < ns; ++j) { // bound slacks
      cols.push_back({{{n + j, 1.0}}});
      costs.push_back(0.0);
    }
    for (int i = 0; i < n; ++i) { // marginal deviation split
      cols.push_back({{{i, 1.0}}});
      costs.push_back(1.0);
      cols.push_back({{{i, -1.0}}});
      costs.push_back(1.0);
    }
    auto lp = simplex_solve(n + ns, rhs, cols, costs);
    if (lp.status == LpStatus::optimal) {
      for (int j = 0; j < ns; ++j) {
        double f = std::min(1.0, std::max(0.0, lp.x[j]));
        if (f <= 0.0) continue;
        for (int i = 0; i < n; ++i)
          for (int l = 0; l < n; ++l)
            gsub(i, l) += f * fin.es.vectors(i, shell[j]) * fin.es.vectors(l, shell[j]);
      }
    }
  }

  // diagonal repair to the exact marginal
  double resid = 0.0;
  for (int i = 0; i < n; ++i) resid = std::max(resid, std::abs(m[i] - gsub(i, i)));
  out.report.marginal_residual = resid;
  if (resid > 1e-15) {
    double alpha = 0.0;
    for (int i = 0; i < n; ++i) {
      double gii = std::min(1.0, std::max(0.0, gsub(i, i)));
      if (m[i] < gii && gii > 0.0) alpha = std::max(alpha, (gii - m[i]) / gii);
      if (m[i] > gii && gii < 1.0) alpha = std::max(alpha, (m[i] - gii) / (1.0 - gii));
    }
    alpha = std::min(1.0, alpha + 1e-15);
    if (alpha > 0.0) {
      std::vector<double> c(n);
      for (int i = 0; i < n; ++i) {
        double gii = gsub(i, i);
        c[i] = std::min(1.0, std::max(0.0, gii + (m[i] - gii) / alpha));
      }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gsub(i, j) *= (1.0 - alpha);
      for (int i = 0; i < n; ++i) gsub(i, i) += alpha * c[i];
    }
    // exact diagonal after repair
    for (int i = 0; i < n; ++i) gsub(i, i) += m[i] - gsub(i, i);
  }

  out.report.primal = trace_prod(ksub, gsub);
  out.value = out.report.primal;
  out.report.gap = out.report.primal - out.report.dual;
  out.report.converged = out.report.gap <= tol * (1.0 + std::abs(out.report.primal));

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.gamma(sup[i], sup[j]) = gsub(i, j);
  return out;
}

TgcResult solve_tgc(const DiscreteDensity& rho, double tol, const TgcOptions& opt) {
  Matrix k = kinetic_matrix(rho.grid());
  return tgc_solve_matrix(k, rho.masses(), tol, opt);
}

FreeFermiResult free_fermi(const Grid& grid, double rho0) {
  if (grid.boundary() != Boundary::periodic) throw InputError("free_fermi: periodic grid required");
  double volume = 1.0;
  for (int a = 0; a < grid.dim(); ++a) volume *= grid.length(a);
  double count_f = rho0 * volume;
  long long count = std::llround(count_f);
  if (std::abs(count_f - double(count)) > 1e-9)
    throw InputError("free_fermi: rho0 * volume must be an integer");
  const std::size_t nsites = grid.size();
  if (count < 0 || count > static_cast<long long>(nsites))
    throw InputError("free_fermi: mode count out of range");
  auto k2 = momentum_sq_list(grid);
  std::vector<std::size_t> order(nsites);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return k2[a] < k2[b]; });
  if (count > 0 && count < static_cast<long long>(nsites)) {
    if (k2[order[count]] - k2[order[count - 1]] < 1e-12)
      throw InputError("free_fermi: requested filling splits a degenerate shell "
                       "(odd counts give symmetric shells in d=1)");
  }
  auto ks = axis_momenta(grid);
  FreeFermiResult out;
  out.modes = static_cast<int>(count);
  out.gamma = Matrix(nsites, nsites);
  double energy = 0.0;
  std::vector<std::vector<double>> kvecs;
  for (long long j = 0; j < count; ++j) {
    auto mm = grid.unravel(order[j]);
    std::vector<double> kv(grid.dim());
    for (int a = 0; a < grid.dim(); ++a) kv[a] = ks[a][mm[a]];
    kvecs.push_back(kv);
    energy += 0.5 * k2[order[j]];
  }
  out.energy = energy;
  for (std::size_t i = 0; i < nsites; ++i) {
    auto xi = grid.center(i);
    for (std::size_t j = i; j < nsites; ++j) {
      auto xj = grid.center(j);
      double acc = 0.0;
      for (const auto& kv : kvecs) {
        double phase = 0.0;
        for (int a = 0; a < grid.dim(); ++a) phase += kv[a] * (xi[a] - xj[a]);
        acc += std::cos(phase);
      }
      acc /= double(nsites);
      out.gamma(i, j) = acc;
      out.gamma(j, i) = acc;
    }
  }
  return out;
}

MarchYoungResult march_young(const DiscreteDensity& rho, int n) {
  const Grid& g = rho.grid();
  if (g.dim() != 1) throw InputError("march_young: d = 1 only");
  if (n < 1) throw InputError("march_young: n >= 1");
  if (std::abs(rho.total_mass() - n) > 1e-9)
    throw InputError("march_young: density mass must equal n");
  const std::size_t cells = g.size();
  const double h = g.spacing(0);

  // support must be one contiguous strictly positive block
  std::size_t first = cells, last = 0;
  for (std::size_t i = 0; i < cells; ++i)
    if (rho.mass(i) > 0.0) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  if (first == cells) throw InputError("march_young: empty density");
  for (std::size_t i = first; i <= last; ++i)
    if (rho.mass(i) <= 0.0)
      throw InputError("march_young: density vanishes inside its support "
                       "(winding phase undefined)");

  MarchYoungResult out;
  const bool periodic = g.boundary() == Boundary::periodic;
  // Centered phase indices. On a ring the winding must be integer, which
  // forces the set {-n/2+1..n/2} for even n; on a line, half-integer
  // offsets keep the sum of squares at n(n^2-1)/12 for every parity.
  for (int j = 0; j < n; ++j) {
    double kappa;
    if (n % 2 == 1)
      kappa = double(j - (n - 1) / 2);
    else
      kappa = periodic ? double(j - n / 2 + 1) : double(j) - double(n - 1) / 2.0;
    out.phase_indices.push_back(kappa);
  }
  double sumk2 = 0.0;
  for (double kp : out.phase_indices) sumk2 += kp * kp;

  double rho3 = rho.power_integral(3.0);
  out.tf_term = 2.0 * M_PI * M_PI * sumk2 / (double(n) * double(n) * double(n)) * rho3;

  if (periodic) {
    out.gradient_term = sqrt_gradient_energy(rho);
  } else {
    // (1/2) int ((sqrt rho)')^2 by central differences inside the box
    std::vector<double> u(cells);
    for (std::size_t i = 0; i < cells; ++i) u[i] = std::sqrt(rho.value(i));
    double grad = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
      double d;
      if (i == 0)
        d = (u[1] - u[0]) / h;
      else if (i + 1 == cells)
        d = (u[cells - 1] - u[cells - 2]) / h;
      else
        d = (u[i + 1] - u[i - 1]) / (2.0 * h);
      grad += h * d * d;
    }
    out.gradient_term = 0.5 * grad;
  }
  out.value = out.tf_term + out.gradient_term;

  // orthonormality via exact per-cell phase integrals: within a cell the
  // cumulative mass is linear, so each cell contributes a closed form
  double max_err = 0.0;
  std::vector<double> cum(cells + 1, 0.0);
  for (std::size_t i = 0; i < cells; ++i) cum[i + 1] = cum[i] + rho.mass(i);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      double dk = out.phase_indices[b] - out.phase_indices[a];
      std::complex<double> acc(0.0, 0.0);
      double A = 2.0 * M_PI * dk / double(n);
      for (std::size_t i = 0; i < cells; ++i) {
        double mi = rho.mass(i);
        if (mi <= 0.0) continue;
        if (std::abs(A) < 1e-15) {
          acc += mi / double(n);
        } else {
          // (rho/n) int e^{iA s(x)} dx over the cell = (e^{iA cum1}-e^{iA cum0})/(iA n)
          std::complex<double> iA(0.0, A);
          acc += (std::exp(iA * cum[i + 1]) - std::exp(iA * cum[i])) / (iA * double(n));
        }
      }
      double target = (a == b) ? 1.0 : 0.0;
      max_err = std::max(max_err, std::abs(acc - std::complex<double>(target, 0.0)));
    }
  out.orthonormality_error = max_err;

  // the pi^2/6 coefficient is the line statement; ring windings at even n
  // carry the (1 + 2/n^2) factor of their integer phase set
  double coeff = M_PI * M_PI / 6.0;
  if (periodic && n % 2 == 0) coeff *= 1.0 + 2.0 / (double(n) * double(n));
  double bound = coeff * rho3 + out.gradient_term;
  if (out.value > bound + 1e-10 * (1.0 + std::abs(bound)))
    throw ToleranceFailure("march_young: orbital energy exceeded the closed-form bound");
  return out;
}

LayerCakeResult layer_cake_dm(const DiscreteDensity& rho, double delta) {
  const Grid& g = rho.grid();
  if (g.dim() != 1 || g.boundary() != Boundary::periodic)
    throw InputError("layer_cake_dm: periodic d=1 grid required");
  if (!(delta > 0.0)) throw InputError("layer_cake_dm: delta > 0");
  const std::size_t cells = g.size();
  const double ell = g.length(0);

  // level breakpoints: window edges per cell and plane-wave entry levels
  std::vector<double> levels;
  double tmax = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    double r = rho.value(i);
    if (r <= 0.0) continue;
    levels.push_back(r);
    levels.push_back((1.0 + delta) * r);
    tmax = std::max(tmax, (1.0 + delta) * r);
  }
  if (levels.empty()) {
    LayerCakeResult zero;
    zero.gamma = Matrix(cells, cells);
    return zero;
  }
  // mode m (pair +-) becomes active at t = 2 m / ell (k_F = pi t at q=1)
  std::vector<std::pair<double, long long>> entries; // (level, mode index)
  entries.push_back({0.0, 0});
  for (long long mm = 1; mm <= static_cast<long long>(cells) / 2; ++mm) {
    double t = 2.0 * double(mm) / ell;
    if (t < tmax) entries.push_back({t, mm});
  }
  for (const auto& [t, mm] : entries)
    if (t > 0.0) levels.push_back(t);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end(),
                           [](double x, double y) { return std::abs(x - y) < 1e-15; }),
               levels.end());

  Matrix proj(cells, cells); // cumulative plane-wave projector
  auto add_mode = [&](long long mm) {
    for (std::size_t i = 0; i < cells; ++i)
      for (std::size_t j = 0; j < cells; ++j) {
        double phase = 2.0 * M_PI * double(mm) * (double(i) - double(j)) / double(cells);
        double term = (mm == 0 ? 1.0 : 2.0 * std::cos(phase)) / double(cells);
        proj(i, j) += term;
      }
  };
  std::size_t next_entry = 0;

  Matrix gamma(cells, cells);
  double tprev = levels.front();
  // activate everything at or below the first level
  while (next_entry < entries.size() && entries[next_entry].first <= tprev + 1e-15) {
    add_mode(entries[next_entry].second);
    ++next_entry;
  }
  for (std::size_t li = 0; li + 1 < levels.size(); ++li) {
    double a = levels[li], b = levels[li + 1];
    double mid = 0.5 * (a + b);
    while (next_entry < entries.size() && entries[next_entry].first <= mid) {
      add_mode(entries[next_entry].second);
      ++next_entry;
    }
    double wseg = std::log(b / a) / delta;
    std::vector<char> ind(cells, 0);
    for (std::size_t i = 0; i < cells; ++i) {
      double r = rho.value(i);
      ind[i] = (r > 0.0 && r <= mid && mid <= (1.0 + delta) * r) ? 1 : 0;
    }
    for (std::size_t i = 0; i < cells; ++i) {
      if (!ind[i]) continue;
      for (std::size_t j = 0; j < cells; ++j)
        if (ind[j]) gamma(i, j) += wseg * proj(i, j);
    }
  }

  LayerCakeResult out;
  // marginal repair, as in the dual solver
  double resid = 0.0;
  const double h = g.cell_volume();
  for (std::size_t i = 0; i < cells; ++i)
    resid = std::max(resid, std::abs(rho.mass(i) - gamma(i, i)));
  out.marginal_residual = resid;
  double alpha = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    double gii = std::min(1.0, std::max(0.0, gamma(i, i)));
    double mi = rho.mass(i);
    if (mi > 1.0 + 1e-12)
      throw InputError("layer_cake_dm: cell mass exceeds 1, refine the grid");
    if (mi < gii && gii > 0.0) alpha = std::max(alpha, (gii - mi) / gii);
    if (mi > gii && gii < 1.0) alpha = std::max(alpha, (mi - gii) / (1.0 - gii));
  }
  if (alpha > 0.0) {
    alpha = std::min(1.0, alpha + 1e-15);
    std::vector<double> c(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      double gii = gamma(i, i);
      c[i] = std::min(1.0, std::max(0.0, gii + (rho.mass(i) - gii) / alpha));
    }
    for (std::size_t i = 0; i < cells; ++i)
      for (std::size_t j = 0; j < cells; ++j) gamma(i, j) *= (1.0 - alpha);
    for (std::size_t i = 0; i < cells; ++i) gamma(i, i) += alpha * c[i];
  }
  for (std::size_t i = 0; i < cells; ++i) gamma(i, i) += rho.mass(i) - gamma(i, i);

  Matrix k = kinetic_matrix(g);
  out.gamma = gamma;
  out.energy = trace_prod(k, gamma);
  out.epsilon_theory = delta + delta * delta / 3.0;
  auto es = symmetric_eigen(gamma);
  out.min_eigenvalue = es.values.front();
  out.max_eigenvalue = es.values.back();
  double rho3 = rho.power_integral(3.0);
  double gradient = sqrt_gradient_energy(rho) * 2.0; // int |(sqrt rho)'|^2
  double excess = out.energy - (1.0 + out.epsilon_theory) * thomas_fermi_constant(1) * rho3;
  out.gradient_coefficient = gradient > 1e-14 ? std::max(0.0, excess) / gradient : 0.0;
  (void)h;
  return out;
}

double hoffmann_ostenhof_slack(const Grid& grid, const Matrix& gamma) {
  Matrix k = kinetic_matrix(grid);
  std::vector<double> u(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    u[i] = std::sqrt(std::max(0.0, gamma(i, i)));
  return trace_prod(k, gamma) - quad_form(k, u);
}

double lieb_thirring_slack(const Grid& grid, const Matrix& gamma, double q) {
  Matrix k = kinetic_matrix(grid);
  const int d = grid.dim();
  const double h = grid.cell_volume();
  double integral = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double rho = std::max(0.0, gamma(i, i)) / h;
    integral += h * std::pow(rho, 1.0 + 2.0 / d);
  }
  return trace_prod(k, gamma) -
         lt_constant_lower_bound(d) * std::pow(q, -2.0 / d) * integral;
}

double li_yau_slack(const DiscreteDensity& rho, double kinetic_value) {
  const Grid& g = rho.grid();
  const int d = g.dim();
  const double h = g.cell_volume();
  double omega = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (rho.mass(i) > 0.0) {
      omega += h;
      mass += rho.mass(i);
    }
  if (mass == 0.0) return kinetic_value;
  return kinetic_value -
         thomas_fermi_constant(d) * std::pow(omega, -2.0 / d) * std::pow(mass, 1.0 + 2.0 / d);
}

KineticBracket lda_kinetic_bracket(const DiscreteDensity& rho, double eps, double q, double kappa,
                                   double kappa_prime) {
  if (!(eps > 0.0)) throw InputError("lda_kinetic_bracket: eps > 0");
  const int d = rho.grid().dim();
  double tf = rho.power_integral(1.0 + 2.0 / d);
  double grad = 2.0 * sqrt_gradient_energy(rho); // int |grad sqrt rho|^2
  double qfac = std::pow(q, -2.0 / d);
  double ctf = thomas_fermi_constant(d);
  KineticBracket b;
  b.lower = qfac * ctf * (1.0 - eps) * tf - kappa / std::pow(eps, 3.0 + 4.0 / d) * grad;
  b.upper = qfac * ctf * (1.0 + eps) * tf + kappa_prime * (1.0 + eps) / eps * grad;
  return b;
}

} // namespace dfl
