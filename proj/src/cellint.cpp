#include "dfl/cellint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dfl/errors.hpp"
#include "dfl/numerics.hpp"
#include "dfl/parallel.hpp"

namespace dfl {

CellGeometry CellGeometry::from_lattice(const Lattice& lat) {
  CellGeometry g;
  g.d = lat.dim();
  g.B = lat.basis();
  g.diagonal_identity = lat.cubic_cell();
  return g;
}

CellGeometry CellGeometry::box(const std::vector<double>& sides) {
  CellGeometry g;
  g.d = static_cast<int>(sides.size());
  g.B = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  g.diagonal_identity = true;
  for (int a = 0; a < g.d; ++a) {
    g.B[a][a] = sides[a];
    if (sides[a] != 1.0) g.diagonal_identity = false;
  }
  return g;
}

std::array<double, 3> CellGeometry::map(const std::array<double, 3>& t) const {
  std::array<double, 3> p{0, 0, 0};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) p[i] += B[i][j] * t[j];
  return p;
}

double CellGeometry::radius(const std::array<double, 3>& t) const {
  auto p = map(t);
  return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

namespace {

bool needs_duffy(const InteractionKernel& w) {
  // power-law singularity or a |r| kink at the origin
  return w.kind() == InteractionKernel::Kind::riesz || w.kind() == InteractionKernel::Kind::neg_abs;
}

using Poly = std::array<double, 4>; // c0 + c1 x + c2 x^2 + c3 x^3

double poly_eval(const Poly& p, double x) {
  return p[0] + x * (p[1] + x * (p[2] + x * p[3]));
}

// p(c + s u) expanded in u
Poly poly_shift_scale(const Poly& p, double c, double s) {
  Poly out{0, 0, 0, 0};
  // binomial expansion of each monomial (c + s u)^j
  double cj[4][4] = {{1, 0, 0, 0},
                     {c, s, 0, 0},
                     {c * c, 2 * c * s, s * s, 0},
                     {c * c * c, 3 * c * c * s, 3 * c * s * s, s * s * s}};
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k <= j; ++k) out[k] += p[j] * cj[j][k];
  return out;
}

struct SplinePiece {
  double lo, hi;
  Poly c; // polynomial in the axis coordinate t
};

// centered cardinal B-splines: B1 box, B2 triangle, B3 quadratic, B4 cubic
std::vector<SplinePiece> spline_pieces(int n) {
  switch (n) {
    case 1: return {{-0.5, 0.5, {1, 0, 0, 0}}};
    case 2: return {{-1, 0, {1, 1, 0, 0}}, {0, 1, {1, -1, 0, 0}}};
    case 3:
      return {{-1.5, -0.5, {1.125, 1.5, 0.5, 0}},
              {-0.5, 0.5, {0.75, 0, -1, 0}},
              {0.5, 1.5, {1.125, -1.5, 0.5, 0}}};
    case 4:
      return {{-2, -1, {4.0 / 3.0, 2, 1, 1.0 / 6.0}},
              {-1, 0, {2.0 / 3.0, 0, -1, -0.5}},
              {0, 1, {2.0 / 3.0, 0, -1, 0.5}},
              {1, 2, {4.0 / 3.0, -2, 1, -1.0 / 6.0}}};
  }
  throw InputError("spline_pieces: order must be 1..4");
}

// per-axis second and fourth moments of B_n (sums of n centered uniforms)
void spline_moments(int n, double& m2, double& m4) {
  m2 = n / 12.0;
  m4 = n / 80.0 + 3.0 * n * (n - 1) / 144.0;
}

struct Segment {
  double start; // offset from the singular corner, u = |t - c|
  double len;
  int sign;     // t = c + sign * u
  Poly c;       // weight polynomial in u
  bool touches; // contains u = 0
};

// split the spline pieces of one axis around the singular coordinate cc
std::vector<Segment> axis_segments(int n, int cc) {
  auto pieces = spline_pieces(n);
  std::vector<Segment> out;
  for (int dir : {+1, -1}) {
    // breakpoints from cc outward in direction dir
    std::vector<double> bps{0.0};
    for (const auto& p : pieces) {
      for (double edge : {p.lo, p.hi}) {
        double u = (edge - cc) * dir;
        if (u > 1e-12) bps.push_back(u);
      }
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              bps.end());
    for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
      double ulo = bps[i], uhi = bps[i + 1];
      double tm = cc + dir * 0.5 * (ulo + uhi);
      const SplinePiece* piece = nullptr;
      for (const auto& p : pieces)
        if (tm > p.lo - 1e-12 && tm < p.hi + 1e-12) piece = &p;
      if (!piece) continue;
      Segment s;
      s.start = ulo;
      s.len = uhi - ulo;
      s.sign = dir;
      s.c = poly_shift_scale(piece->c, double(cc), double(dir));
      s.touches = ulo < 1e-12;
      out.push_back(s);
    }
  }
  return out;
}

// tensor Gauss over a subbox in u coordinates (no singularity inside)
double plain_u_box(const CellGeometry& g, const std::array<Segment, 3>& segs,
                   const InteractionKernel& w, int order) {
  const GaussRule& r = gauss_rule(order);
  const int d = g.d;
  double total = 0.0;
  std::array<int, 3> idx{0, 0, 0};
  std::array<int, 3> n{order, d > 1 ? order : 1, d > 2 ? order : 1};
  for (idx[0] = 0; idx[0] < n[0]; ++idx[0])
    for (idx[1] = 0; idx[1] < n[1]; ++idx[1])
      for (idx[2] = 0; idx[2] < n[2]; ++idx[2]) {
        double wt = 1.0, weight = 1.0;
        std::array<double, 3> t{0, 0, 0};
        for (int a = 0; a < d; ++a) {
          const Segment& s = segs[a];
          double half = 0.5 * s.len;
          double u = s.start + half * (1.0 + r.x[idx[a]]);
          wt *= half * r.w[idx[a]];
          weight *= poly_eval(s.c, u);
          t[a] = s.sign * u;
        }
        total += wt * weight * w(g.radius(t));
      }
  return total;
}

// Duffy pyramids over a subbox touching the singular corner. The radial
// direction is pulled out so the integrand is smooth; riesz gets an extra
// xi = zeta^2 grading.
double duffy_u_box(const CellGeometry& g, const std::array<Segment, 3>& segs,
                   const InteractionKernel& w, int order) {
  const GaussRule& r = gauss_rule(order);
  const int d = g.d;
  const bool riesz = w.kind() == InteractionKernel::Kind::riesz;
  const double s_exp = riesz ? w.exponent() : 0.0;

  double e[3] = {1, 1, 1};
  double extent_prod = 1.0;
  for (int a = 0; a < d; ++a) {
    e[a] = segs[a].len;
    extent_prod *= e[a];
  }

  double total = 0.0;
  for (int p = 0; p < d; ++p) {
    std::array<int, 3> n{order, d > 1 ? order : 1, d > 2 ? order : 1};
    std::array<int, 3> idx{0, 0, 0};
    double part = 0.0;
    for (idx[0] = 0; idx[0] < n[0]; ++idx[0])
      for (idx[1] = 0; idx[1] < n[1]; ++idx[1])
        for (idx[2] = 0; idx[2] < n[2]; ++idx[2]) {
          double q[3];
          double wt = 1.0;
          for (int a = 0; a < d; ++a) {
            q[a] = 0.5 * (1.0 + r.x[idx[a]]);
            wt *= 0.5 * r.w[idx[a]];
          }
          double xi, jac_radial;
          if (riesz) {
            double zeta = q[0];
            xi = zeta * zeta;
            jac_radial = 2.0 * std::pow(zeta, 2.0 * (d - s_exp) - 1.0);
          } else {
            xi = q[0];
            jac_radial = std::pow(xi, double(d)); // xi^{d-1} * xi from w = -xi R
          }
          std::array<double, 3> v{0, 0, 0};
          std::array<double, 3> u{0, 0, 0};
          int qi = 1;
          for (int a = 0; a < d; ++a) {
            double va = (a == p) ? e[a] : e[a] * q[qi++];
            v[a] = segs[a].sign * va;
            u[a] = va * xi;
          }
          double R = g.radius(v);
          double weight = 1.0;
          for (int a = 0; a < d; ++a) weight *= poly_eval(segs[a].c, u[a]);
          double val;
          if (riesz)
            val = jac_radial * std::pow(R, -s_exp) * weight;
          else
            val = -jac_radial * R * weight; // neg_abs
          part += wt * val;
        }
    total += extent_prod * part;
  }
  return total;
}

double generic_spline_integral(const CellGeometry& g, const std::array<int, 3>& z,
                               const InteractionKernel& w, int spline_order, int order) {
  const int d = g.d;
  const double half_support = 0.5 * spline_order;
  bool inside = true;
  for (int a = 0; a < d; ++a)
    if (std::abs(z[a]) >= half_support) inside = false;

  // segment decomposition around c_a = -z_a (or around 0 when the kernel is
  // smooth; the pieces are the same, only the grading differs)
  std::array<std::vector<Segment>, 3> axis_segs;
  for (int a = 0; a < d; ++a) {
    int cc = inside && needs_duffy(w) ? -z[a] : 0;
    axis_segs[a] = axis_segments(spline_order, cc);
  }
  const bool graded = needs_duffy(w) && inside;

  double total = 0.0;
  std::array<std::size_t, 3> counts{axis_segs[0].size(), d > 1 ? axis_segs[1].size() : 1,
                                    d > 2 ? axis_segs[2].size() : 1};
  Segment unit{0, 1, 1, {1, 0, 0, 0}, true};
  for (std::size_t c0 = 0; c0 < counts[0]; ++c0)
    for (std::size_t c1 = 0; c1 < counts[1]; ++c1)
      for (std::size_t c2 = 0; c2 < counts[2]; ++c2) {
        std::array<Segment, 3> segs{axis_segs[0][c0], d > 1 ? axis_segs[1][c1] : unit,
                                    d > 2 ? axis_segs[2][c2] : unit};
        if (graded) {
          bool all_touch = true;
          for (int a = 0; a < d; ++a)
            if (!segs[a].touches) all_touch = false;
          if (all_touch) {
            total += duffy_u_box(g, segs, w, order);
            continue;
          }
          total += plain_u_box(g, segs, w, order);
        } else {
          // smooth: segments are relative to 0; shift the radius by z via a
          // sign-folded copy
          std::array<Segment, 3> shifted = segs;
          double val = 0.0;
          // evaluate directly with t = sign*u and radius |B(t + z)|
          const GaussRule& r = gauss_rule(order);
          std::array<int, 3> n{order, d > 1 ? order : 1, d > 2 ? order : 1};
          std::array<int, 3> idx{0, 0, 0};
          for (idx[0] = 0; idx[0] < n[0]; ++idx[0])
            for (idx[1] = 0; idx[1] < n[1]; ++idx[1])
              for (idx[2] = 0; idx[2] < n[2]; ++idx[2]) {
                double wt = 1.0, weight = 1.0;
                std::array<double, 3> t{0, 0, 0};
                for (int a = 0; a < d; ++a) {
                  const Segment& s = shifted[a];
                  double half = 0.5 * s.len;
                  double u = s.start + half * (1.0 + r.x[idx[a]]);
                  wt *= half * r.w[idx[a]];
                  weight *= poly_eval(s.c, u);
                  t[a] = s.sign * u + double(z[a]);
                }
                val += wt * weight * w(g.radius(t));
              }
          total += val;
        }
      }
  return total;
}

// radial derivatives of r^-s contracted with kernel moments
double riesz_far_value(const CellGeometry& g, const std::array<int, 3>& z, double s, double m2,
                       double m4, double* err) {
  const int d = g.d;
  std::array<double, 3> p = g.map({double(z[0]), double(z[1]), double(z[2])});
  double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
  double r = std::sqrt(r2);
  double w0 = std::pow(r, -s);

  double bbt[3][3] = {{0}};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) bbt[i][j] += g.B[i][k] * g.B[j][k];
  double tr = 0, pMp = 0;
  for (int i = 0; i < d; ++i) {
    tr += bbt[i][i];
    for (int j = 0; j < d; ++j) pMp += p[i] * bbt[i][j] * p[j];
  }
  double second = 0.5 * m2 * (-s * tr * std::pow(r, -s - 2) + s * (s + 2) * pMp * std::pow(r, -s - 4));

  double fourth = 0.0;
  if (g.diagonal_identity) {
    double sum_p4 = 0;
    for (int i = 0; i < d; ++i) sum_p4 += p[i] * p[i] * p[i] * p[i];
    double d4 = 3 * d * s * (s + 2) * std::pow(r, -s - 4) -
                6 * s * (s + 2) * (s + 4) * std::pow(r, -s - 4) +
                s * (s + 2) * (s + 4) * (s + 6) * sum_p4 * std::pow(r, -s - 8);
    double bilap = s * (s + 2 - d) * (s + 2) * (s + 4 - d) * std::pow(r, -s - 4);
    fourth = ((m4 - 3 * m2 * m2) * d4 + 3 * m2 * m2 * bilap) / 24.0;
  }
  if (err) {
    double probe = (fourth != 0.0) ? std::abs(fourth) : std::abs(second);
    *err = probe * m2 * (s + 4) * (s + 6) / r2;
    if (!g.diagonal_identity) *err += std::abs(second) * m2 * (s + 2) * (s + 4) / r2;
  }
  return w0 + second + fourth;
}

// d=1 closed forms: the B_n-weighted integral is the n-th finite difference
// of the n-fold antiderivative with alternating parity
double spline_integral_1d_closed(int offset, int n, const InteractionKernel& w) {
  // k-th antiderivative of the even kernel, vanishing at 0, with parity
  // (-1)^k; B_n-weighted integrals are its n-th central finite differences
  auto prim = [&](int k, double x) -> double {
    double ax = std::abs(x);
    double v;
    if (w.kind() == InteractionKernel::Kind::riesz) {
      double denom = 1.0;
      for (int j = 1; j <= k; ++j) denom *= (j - w.exponent());
      v = std::pow(ax, k - w.exponent()) / denom;
    } else { // neg_abs
      double denom = 1.0;
      for (int j = 2; j <= k + 1; ++j) denom *= j;
      v = -std::pow(ax, k + 1) / denom;
    }
    if (k % 2 == 1 && x < 0) v = -v;
    return v;
  };
  double acc = 0.0;
  double comb = 1.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) comb = comb * (n - k + 1) / k;
    double sign = (k % 2 == 0) ? 1.0 : -1.0;
    acc += sign * comb * prim(n, double(offset) + 0.5 * n - k);
  }
  return acc;
}

} // namespace

double spline_pair_integral(const CellGeometry& g, const std::array<int, 3>& z,
                            const InteractionKernel& w, int spline_order, int order) {
  if (g.d == 0 || g.d > 3) throw InputError("spline_pair_integral: bad dimension");
  bool at_origin = z == std::array<int, 3>{0, 0, 0};
  if (w.kind() == InteractionKernel::Kind::riesz && at_origin && !w.integrable_self(g.d))
    throw InputError("spline_pair_integral: riesz self integral diverges for s >= d");
  if (g.d == 1 && (w.kind() == InteractionKernel::Kind::riesz ||
                   w.kind() == InteractionKernel::Kind::neg_abs) &&
      g.B[0][0] == 1.0)
    return spline_integral_1d_closed(z[0], spline_order, w);
  return generic_spline_integral(g, z, w, spline_order, order);
}

double spline_pair_far(const CellGeometry& g, const std::array<int, 3>& z,
                       const InteractionKernel& w, int spline_order, double* error_estimate) {
  if (w.kind() != InteractionKernel::Kind::riesz)
    throw InputError("spline_pair_far: multipole path only for riesz kernels");
  double m2, m4;
  spline_moments(spline_order, m2, m4);
  return riesz_far_value(g, z, w.exponent(), m2, m4, error_estimate);
}

double cell_pair_integral(const CellGeometry& g, const std::array<int, 3>& z,
                          const InteractionKernel& w, int order) {
  return spline_pair_integral(g, z, w, 2, order);
}

double point_cell_integral(const CellGeometry& g, const std::array<int, 3>& z,
                           const InteractionKernel& w, int order) {
  return spline_pair_integral(g, z, w, 1, order);
}

double cell_pair_far(const CellGeometry& g, const std::array<int, 3>& z,
                     const InteractionKernel& w, double* error_estimate) {
  return spline_pair_far(g, z, w, 2, error_estimate);
}

double point_cell_far(const CellGeometry& g, const std::array<int, 3>& z,
                      const InteractionKernel& w, double* error_estimate) {
  return spline_pair_far(g, z, w, 1, error_estimate);
}

long long pack_z(const std::array<int, 3>& z) {
  return (z[0] + 512LL) + 1024LL * (z[1] + 512LL) + 1024LL * 1024LL * (z[2] + 512LL);
}

PairTables::PairTables(const Lattice& lat, const InteractionKernel& w, int order, int near_range)
    : geom_(CellGeometry::from_lattice(lat)), w_(w), order_(order), near_range_(near_range) {}

namespace {
std::array<int, 3> canonical(const std::array<int, 3>& z) {
  std::array<int, 3> neg{-z[0], -z[1], -z[2]};
  return std::max(z, neg);
}
} // namespace

double PairTables::compute_cc(const std::array<int, 3>& z, double* err) {
  int zmax = std::max({std::abs(z[0]), std::abs(z[1]), std::abs(z[2])});
  if (geom_.d > 1 && w_.kind() == InteractionKernel::Kind::riesz && zmax > near_range_)
    return cell_pair_far(geom_, z, w_, err);
  return cell_pair_integral(geom_, z, w_, order_);
}

double PairTables::compute_pc(const std::array<int, 3>& z, double* err) {
  int zmax = std::max({std::abs(z[0]), std::abs(z[1]), std::abs(z[2])});
  if (geom_.d > 1 && w_.kind() == InteractionKernel::Kind::riesz && zmax > near_range_)
    return point_cell_far(geom_, z, w_, err);
  return point_cell_integral(geom_, z, w_, order_);
}

void PairTables::ensure(const std::vector<std::array<int, 3>>& diffs) {
  std::vector<std::array<int, 3>> todo;
  for (const auto& z : diffs) {
    auto c = canonical(z);
    long long key = pack_z(c);
    if (cc_.find(key) == cc_.end()) {
      cc_.emplace(key, 0.0);
      todo.push_back(c);
    }
  }
  std::sort(todo.begin(), todo.end());
  todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
  std::vector<double> err_cc(todo.size(), 0.0), err_pc(todo.size(), 0.0);
  auto cc_vals =
      parallel_map(todo.size(), [&](std::size_t i) { return compute_cc(todo[i], &err_cc[i]); });
  auto pc_vals =
      parallel_map(todo.size(), [&](std::size_t i) { return compute_pc(todo[i], &err_pc[i]); });
  for (std::size_t i = 0; i < todo.size(); ++i) {
    long long key = pack_z(todo[i]);
    cc_[key] = cc_vals[i];
    pc_[key] = pc_vals[i];
    far_error_ = std::max({far_error_, err_cc[i], err_pc[i]});
  }
}

double PairTables::cell_cell(const std::array<int, 3>& z) const {
  auto it = cc_.find(pack_z(canonical(z)));
  if (it == cc_.end()) throw std::logic_error("PairTables: cell_cell difference not prepared");
  return it->second;
}

double PairTables::point_cell(const std::array<int, 3>& z) const {
  auto it = pc_.find(pack_z(canonical(z)));
  if (it == pc_.end()) throw std::logic_error("PairTables: point_cell difference not prepared");
  return it->second;
}

} // namespace dfl
