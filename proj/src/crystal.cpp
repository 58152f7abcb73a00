#include "dfl/crystal.hpp"

#include <cmath>
#include <map>
#include <unordered_map>

#include "dfl/errors.hpp"
#include "dfl/numerics.hpp"
#include "dfl/parallel.hpp"

namespace dfl {

namespace {

void validate_crystal_kernel(const Lattice& lat, const InteractionKernel& w) {
  const int d = lat.dim();
  if (w.kind() == InteractionKernel::Kind::riesz) {
    if (!(w.exponent() < d))
      throw InputError("crystal energies need riesz exponent s < d");
    return;
  }
  if (w.kind() == InteractionKernel::Kind::neg_abs) {
    if (d != 1) throw InputError("neg_abs kernel is d=1 only");
    return;
  }
  throw InputError("crystal energies support riesz and neg_abs kernels");
}

// multiplicity of each integer difference over ordered point pairs,
// including the zero difference
std::vector<std::pair<std::array<int, 3>, long long>> difference_counts(
    const std::vector<std::array<int, 3>>& zs) {
  std::map<std::array<int, 3>, long long> counts;
  for (const auto& a : zs)
    for (const auto& b : zs) {
      std::array<int, 3> dz{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
      ++counts[dz];
    }
  return {counts.begin(), counts.end()};
}

double weighted_table_sum(const std::vector<std::pair<std::array<int, 3>, long long>>& counts,
                          const PairTables& tables, bool point_cell) {
  std::vector<double> terms(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& [z, c] = counts[i];
    double v = point_cell ? tables.point_cell(z) : tables.cell_cell(z);
    terms[i] = double(c) * v;
  }
  return pairwise_sum(terms);
}

} // namespace

FiniteCrystal finite_crystal(const Lattice& lat, double L) {
  if (!(L > 0.0)) throw InputError("finite_crystal: L must be > 0");
  FiniteCrystal fc{lat, L, lat.points_in_cube(L), {}};
  fc.pts.reserve(fc.zs.size());
  for (const auto& z : fc.zs) fc.pts.push_back(lat.point(z));
  return fc;
}

double pair_sum(const std::vector<std::array<double, 3>>& pts, int d, const InteractionKernel& w) {
  (void)d;
  const std::size_t n = pts.size();
  auto row = [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double dx = pts[i][0] - pts[j][0];
      double dy = pts[i][1] - pts[j][1];
      double dz = pts[i][2] - pts[j][2];
      s += w(std::sqrt(dx * dx + dy * dy + dz * dz));
    }
    return s;
  };
  return parallel_sum(n, row);
}

double pair_sum_serial(const std::vector<std::array<double, 3>>& pts, int d,
                       const InteractionKernel& w) {
  (void)d;
  const std::size_t n = pts.size();
  auto row = [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double dx = pts[i][0] - pts[j][0];
      double dy = pts[i][1] - pts[j][1];
      double dz = pts[i][2] - pts[j][2];
      s += w(std::sqrt(dx * dx + dy * dy + dz * dz));
    }
    return s;
  };
  return serial_sum(n, row);
}

double box_self_integral(int d, const InteractionKernel& w, double L, int order) {
  if (!(L > 0.0)) throw InputError("box_self_integral: L must be > 0");
  if (w.kind() == InteractionKernel::Kind::neg_abs) {
    if (d != 1) throw InputError("neg_abs kernel is d=1 only");
    return -L * L * L / 6.0;
  }
  if (w.kind() != InteractionKernel::Kind::riesz)
    throw InputError("box_self_integral supports riesz and neg_abs kernels");
  const double s = w.exponent();
  if (!(s < d)) throw InputError("box_self_integral: need s < d");
  double T = 0.0;
  if (d == 1) {
    T = 2.0 / ((1.0 - s) * (2.0 - s));
  } else if (d == 2) {
    auto f = [&](double u) {
      return std::pow(1.0 + u * u, -0.5 * s) *
             (1.0 / (2.0 - s) - (1.0 + u) / (3.0 - s) + u / (4.0 - s));
    };
    T = 8.0 * gauss_integrate(f, 0.0, 1.0, order);
  } else {
    const GaussRule& r = gauss_rule(order);
    double acc = 0.0;
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j) {
        double u = 0.5 * (1.0 + r.x[i]);
        double v = 0.5 * (1.0 + r.x[j]);
        double poly = 1.0 / (3.0 - s) - (1.0 + u + v) / (4.0 - s) +
                      (u + v + u * v) / (5.0 - s) - u * v / (6.0 - s);
        acc += 0.25 * r.w[i] * r.w[j] * std::pow(1.0 + u * u + v * v, -0.5 * s) * poly;
      }
    T = 24.0 * acc;
  }
  return 0.5 * std::pow(L, 2.0 * d - s) * T;
}

CrystalEnergyBreakdown floating_indirect(const Lattice& lat, double L, const InteractionKernel& w,
                                         int order) {
  validate_crystal_kernel(lat, w);
  if (lat.dim() == 3 && L > 8.0)
    throw InputError("floating_indirect: d=3 runs are capped at L <= 8 (quadrature budget)");
  FiniteCrystal fc = finite_crystal(lat, L);
  PairTables tables(lat, w, order);
  auto counts = difference_counts(fc.zs);
  std::vector<std::array<int, 3>> diffs;
  diffs.reserve(counts.size());
  for (const auto& [z, c] : counts) diffs.push_back(z);
  tables.ensure(diffs);

  CrystalEnergyBreakdown out;
  out.L = L;
  out.N = fc.count();
  out.effective_volume = double(out.N);
  out.pair_term = pair_sum(fc.pts, lat.dim(), w);
  out.continuum_term = 0.5 * weighted_table_sum(counts, tables, false);
  out.per_volume = (out.pair_term - out.continuum_term) / double(out.N);
  out.error_estimate = tables.far_error() * double(out.N);
  return out;
}

CrystalEnergyBreakdown jellium_clamped(const Lattice& lat, double L, const InteractionKernel& w,
                                       int order) {
  validate_crystal_kernel(lat, w);
  if (lat.dim() == 3 && L > 8.0)
    throw InputError("jellium_clamped: d=3 runs are capped at L <= 8 (quadrature budget)");
  FiniteCrystal fc = finite_crystal(lat, L);
  PairTables tables(lat, w, order);
  auto counts = difference_counts(fc.zs);
  std::vector<std::array<int, 3>> diffs;
  for (const auto& [z, c] : counts) diffs.push_back(z);
  tables.ensure(diffs);

  CrystalEnergyBreakdown out;
  out.L = L;
  out.N = fc.count();
  out.effective_volume = double(out.N);
  out.pair_term = pair_sum(fc.pts, lat.dim(), w);
  double cross = weighted_table_sum(counts, tables, true);
  double cell_pairs = weighted_table_sum(counts, tables, false);
  out.continuum_term = 0.5 * cell_pairs;
  out.per_volume = (out.pair_term - cross + out.continuum_term) / double(out.N);
  out.error_estimate = tables.far_error() * double(out.N);
  return out;
}

namespace {

double safe_atan(double num, double den) {
  if (num == 0.0) return 0.0;
  return std::atan(num / den);
}

// triple antiderivative of 1/r; the alternating corner sum of this over a
// box whose coordinates do not change sign gives the box potential
double prism_primitive(double x, double y, double z) {
  double r = std::sqrt(x * x + y * y + z * z);
  if (r == 0.0) return 0.0;
  double t = 0.0;
  if (y != 0.0 && z != 0.0) t += y * z * std::log(x + r);
  if (z != 0.0 && x != 0.0) t += z * x * std::log(y + r);
  if (x != 0.0 && y != 0.0) t += x * y * std::log(z + r);
  t -= 0.5 * x * x * safe_atan(y * z, x * r);
  t -= 0.5 * y * y * safe_atan(z * x, y * r);
  t -= 0.5 * z * z * safe_atan(x * y, z * r);
  return t;
}

double prism_corner_sum(const std::array<double, 3>& lo, const std::array<double, 3>& hi) {
  double total = 0.0;
  // sign is +1 when an even number of "lo" coordinates is picked
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        double x = i ? hi[0] : lo[0];
        double y = j ? hi[1] : lo[1];
        double z = k ? hi[2] : lo[2];
        total += (((3 - i - j - k) % 2 == 0) ? 1.0 : -1.0) * prism_primitive(x, y, z);
      }
  return total;
}

} // namespace

double coulomb_box_potential(const std::array<double, 3>& p, const std::array<double, 3>& lo,
                             const std::array<double, 3>& hi) {
  // split the box at p where p cuts it, so every piece sees p at a corner
  // or with one-signed coordinates; the primitive is branch-safe there
  std::array<std::vector<double>, 3> cuts;
  for (int a = 0; a < 3; ++a) {
    cuts[a] = {lo[a] - p[a]};
    if (p[a] > lo[a] && p[a] < hi[a]) cuts[a].push_back(0.0);
    cuts[a].push_back(hi[a] - p[a]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts[0].size(); ++i)
    for (std::size_t j = 0; j + 1 < cuts[1].size(); ++j)
      for (std::size_t k = 0; k + 1 < cuts[2].size(); ++k)
        total += prism_corner_sum({cuts[0][i], cuts[1][j], cuts[2][k]},
                                  {cuts[0][i + 1], cuts[1][j + 1], cuts[2][k + 1]});
  return total;
}

namespace {

// I_{C'} w(|p - x|) dx for the cube of side Lp centered at the origin
double container_potential(int d, const InteractionKernel& w, double Lp,
                           const std::array<double, 3>& p) {
  if (d == 1) {
    double a = -0.5 * Lp, b = 0.5 * Lp;
    if (w.kind() == InteractionKernel::Kind::riesz) {
      double s = w.exponent();
      auto G1 = [&](double u) { // odd primitive of w(|u|)
        double g = std::pow(std::abs(u), 1.0 - s) / (1.0 - s);
        return u >= 0 ? g : -g;
      };
      return G1(b - p[0]) - G1(a - p[0]);
    }
    auto G1 = [&](double u) {
      double g = -u * u / 2.0;
      return u >= 0 ? g : -g;
    };
    return G1(b - p[0]) - G1(a - p[0]);
  }
  if (d == 3 && w.kind() == InteractionKernel::Kind::riesz && w.exponent() == 1.0)
    return coulomb_box_potential(p, {-0.5 * Lp, -0.5 * Lp, -0.5 * Lp},
                                 {0.5 * Lp, 0.5 * Lp, 0.5 * Lp});
  throw InputError("floating_modified: container potential implemented for d=1 kernels and "
                   "the d=3 Coulomb case");
}

} // namespace

CrystalEnergyBreakdown floating_modified(const Lattice& lat, double L, double margin,
                                         const InteractionKernel& w, int order,
                                         int y_points_per_axis) {
  validate_crystal_kernel(lat, w);
  const int d = lat.dim();
  // The fluid layer makes this estimator boundary-dominated until L is
  // several margins wide, so it gets a larger box budget than the bare
  // crystal runs; the cell tables beyond the near range are multipole and
  // stay cheap.
  if (d == 3 && L > 18.0)
    throw InputError("floating_modified: d=3 runs are capped at L <= 18 (quadrature budget)");
  // cell diameter = diameter of the parallelepiped spanned by the basis
  double diam = 0.0;
  {
    std::array<double, 3> corner{0, 0, 0};
    for (int i = 0; i < d; ++i) {
      double c = 0;
      for (int j = 0; j < d; ++j) c += std::abs(lat.basis()[i][j]);
      corner[i] = c;
      diam += c * c;
    }
    diam = std::sqrt(diam);
  }
  if (margin < diam)
    throw InputError("floating_modified: margin must be at least the cell diameter");

  FiniteCrystal fc = finite_crystal(lat, L);
  const long long N = fc.count();
  // integer fluid volume: round the container up
  long long M = static_cast<long long>(std::ceil(std::pow(L + margin, d))) - N;
  if (M < 1) M = 1;
  const double Lp = std::pow(double(N + M), 1.0 / d);

  PairTables tables(lat, w, order);
  auto counts = difference_counts(fc.zs);
  std::vector<std::array<int, 3>> diffs;
  for (const auto& [z, c] : counts) diffs.push_back(z);
  tables.ensure(diffs);

  const double pair_term = pair_sum(fc.pts, d, w);
  const double S = weighted_table_sum(counts, tables, true);   // crystal vs own cells
  const double II = weighted_table_sum(counts, tables, false); // cell-cell double sum
  const double CCp = 2.0 * box_self_integral(d, w, Lp);        // II_{C'^2} w
  const double fm = 1.0 - 1.0 / double(M);

  // translation average over y in the unit cell, fixed tensor Gauss rule
  const GaussRule& gr = gauss_rule(y_points_per_axis);
  const int ny = y_points_per_axis;
  long long y_total = 1;
  for (int a = 0; a < d; ++a) y_total *= ny;

  // cell Gauss rule for the container-cell cross term
  const int cell_order = 6;
  const GaussRule& cr = gauss_rule(cell_order);

  auto y_term = [&](std::size_t yi) {
    std::array<int, 3> yidx{0, 0, 0};
    std::size_t rest = yi;
    for (int a = 0; a < d; ++a) {
      yidx[a] = static_cast<int>(rest % ny);
      rest /= ny;
    }
    double yw = 1.0;
    std::array<double, 3> tcell{0, 0, 0};
    for (int a = 0; a < d; ++a) {
      tcell[a] = 0.5 * gr.x[yidx[a]];
      yw *= 0.5 * gr.w[yidx[a]];
    }
    // y = B t, t uniform over the centered unit cell
    std::array<double, 3> y{0, 0, 0};
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) y[i] += lat.basis()[i][j] * tcell[j];

    double X = 0.0;
    for (const auto& p : fc.pts)
      X += container_potential(d, w, Lp, {p[0] + y[0], p[1] + y[1], p[2] + y[2]});

    // KS = sum_l I_Q PHI(B z_l + y + b) db
    double KS = 0.0;
    for (const auto& p : fc.pts) {
      double cell_acc = 0.0;
      std::array<int, 3> ci{0, 0, 0};
      std::array<int, 3> nmax{cell_order, d > 1 ? cell_order : 1, d > 2 ? cell_order : 1};
      for (ci[0] = 0; ci[0] < nmax[0]; ++ci[0])
        for (ci[1] = 0; ci[1] < nmax[1]; ++ci[1])
          for (ci[2] = 0; ci[2] < nmax[2]; ++ci[2]) {
            double bw = 1.0;
            std::array<double, 3> tb{0, 0, 0};
            for (int a = 0; a < d; ++a) {
              tb[a] = 0.5 * cr.x[ci[a]];
              bw *= 0.5 * cr.w[ci[a]];
            }
            std::array<double, 3> b{0, 0, 0};
            for (int i = 0; i < d; ++i)
              for (int j = 0; j < d; ++j) b[i] += lat.basis()[i][j] * tb[j];
            cell_acc += bw * container_potential(
                                 d, w, Lp, {p[0] + y[0] + b[0], p[1] + y[1] + b[1], p[2] + y[2] + b[2]});
          }
      KS += cell_acc;
    }
    double e_ind = pair_term - S + X - fm * KS + fm * 0.5 * II - 0.5 * CCp / double(M);
    return yw * e_ind;
  };

  double averaged = parallel_sum(static_cast<std::size_t>(y_total), y_term);

  // The averaged density of this state is constant only well inside the
  // container: the crystal cells average to sharp boxes while the fluid
  // hole averages to their smeared images. The self-energy of that density
  // therefore differs from the plain container term by smeared cell-pair
  // sums and by the box-vs-smeared average of the container potential.
  double correction = 0.0;
  {
    CellGeometry geom = CellGeometry::from_lattice(lat);
    std::vector<std::array<int, 3>> dz;
    dz.reserve(counts.size());
    for (const auto& [z, cmult] : counts) dz.push_back(z);
    auto combo_vals = parallel_map(dz.size(), [&](std::size_t i) {
      const auto& z = dz[i];
      int zmax = std::max({std::abs(z[0]), std::abs(z[1]), std::abs(z[2])});
      double i3, i4;
      if (d == 1 || zmax <= 3 || w.kind() != InteractionKernel::Kind::riesz) {
        i3 = spline_pair_integral(geom, z, w, 3, 8);
        i4 = spline_pair_integral(geom, z, w, 4, 8);
      } else {
        i3 = spline_pair_far(geom, z, w, 3);
        i4 = spline_pair_far(geom, z, w, 4);
      }
      return i3 - 0.5 * i4;
    });
    double combo = 0.0;
    {
      std::vector<double> terms(dz.size());
      for (std::size_t i = 0; i < dz.size(); ++i) {
        const auto& [z, cmult] = counts[i];
        terms[i] = double(cmult) * (combo_vals[i] - 0.5 * tables.cell_cell(z));
      }
      combo = pairwise_sum(terms);
    }
    // box-averaged minus smeared-averaged container potential per cell
    const GaussRule& br = gauss_rule(cell_order);
    auto cell_avgs = parallel_map(fc.pts.size(), [&](std::size_t j) {
      const auto& p = fc.pts[j];
      double box_avg = 0.0, smear_avg = 0.0;
      std::array<int, 3> ci{0, 0, 0};
      std::array<int, 3> nmax{cell_order, d > 1 ? cell_order : 1, d > 2 ? cell_order : 1};
      for (ci[0] = 0; ci[0] < nmax[0]; ++ci[0])
        for (ci[1] = 0; ci[1] < nmax[1]; ++ci[1])
          for (ci[2] = 0; ci[2] < nmax[2]; ++ci[2]) {
            double bw = 1.0;
            std::array<double, 3> tb{0, 0, 0};
            for (int a = 0; a < d; ++a) {
              tb[a] = 0.5 * br.x[ci[a]];
              bw *= 0.5 * br.w[ci[a]];
            }
            std::array<double, 3> b{0, 0, 0};
            for (int i = 0; i < d; ++i)
              for (int jj = 0; jj < d; ++jj) b[i] += lat.basis()[i][jj] * tb[jj];
            box_avg += bw * container_potential(
                               d, w, Lp, {p[0] + b[0], p[1] + b[1], p[2] + b[2]});
          }
      // triangle-weighted average over [-1,1]^d in cell coordinates
      long long half_total = 1;
      for (int a = 0; a < d; ++a) half_total *= 2;
      for (long long oct = 0; oct < half_total; ++oct) {
        std::array<int, 3> ci2{0, 0, 0};
        for (ci2[0] = 0; ci2[0] < nmax[0]; ++ci2[0])
          for (ci2[1] = 0; ci2[1] < nmax[1]; ++ci2[1])
            for (ci2[2] = 0; ci2[2] < nmax[2]; ++ci2[2]) {
              double bw = 1.0;
              std::array<double, 3> tb{0, 0, 0};
              for (int a = 0; a < d; ++a) {
                double sgn = ((oct >> a) & 1) ? -1.0 : 1.0;
                double u = 0.5 * (1.0 + br.x[ci2[a]]); // in [0,1]
                tb[a] = sgn * u;
                bw *= 0.5 * br.w[ci2[a]] * (1.0 - u);
              }
              std::array<double, 3> b{0, 0, 0};
              for (int i = 0; i < d; ++i)
                for (int jj = 0; jj < d; ++jj) b[i] += lat.basis()[i][jj] * tb[jj];
              smear_avg += bw * container_potential(
                                   d, w, Lp, {p[0] + b[0], p[1] + b[1], p[2] + b[2]});
            }
      }
      return box_avg - smear_avg;
    });
    correction = combo - pairwise_sum(cell_avgs);
  }

  CrystalEnergyBreakdown out;
  out.L = L;
  out.N = N;
  out.effective_volume = double(N + M);
  out.pair_term = pair_term;
  out.continuum_term = 0.5 * CCp;
  // normalized per crystal volume: same limit as per container volume, but
  // without the fluid-fraction dilution that dominates small boxes
  out.per_volume = (averaged + correction) / double(N);
  out.error_estimate = tables.far_error() * double(N);
  return out;
}

SweepFit crystal_sweep(const Lattice& lat, CrystalMode mode, const InteractionKernel& w,
                       const std::vector<double>& Ls, bool fit, double margin, int order) {
  SweepFit out;
  out.Ls = Ls;
  for (double L : Ls) {
    CrystalEnergyBreakdown b;
    switch (mode) {
      case CrystalMode::floating: b = floating_indirect(lat, L, w, order); break;
      case CrystalMode::clamped: b = jellium_clamped(lat, L, w, order); break;
      case CrystalMode::modified: b = floating_modified(lat, L, margin, w, order); break;
    }
    out.values.push_back(b.per_volume);
  }
  if (fit && Ls.size() >= 2) {
    InverseFit f = fit_inverse(out.Ls, out.values);
    out.limit = f.limit;
    out.slope = f.slope;
    out.residual = f.residual;
  } else if (!out.values.empty()) {
    out.limit = out.values.back();
  }
  return out;
}

} // namespace dfl
