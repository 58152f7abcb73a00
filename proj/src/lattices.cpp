#include "dfl/lattices.hpp"

#include <cmath>
#include <stdexcept>

#include "dfl/errors.hpp"

namespace dfl {

namespace {

std::array<std::array<double, 3>, 3> inverse_transpose(const std::array<std::array<double, 3>, 3>& b,
                                                       int d, double& det_out) {
  // embed as 3x3 with identity padding
  double m[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m[i][j] = b[i][j];
  double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  det_out = det;
  double inv[3][3];
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  std::array<std::array<double, 3>, 3> out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = inv[j][i]; // transpose of inverse
  return out;
}

} // namespace

Lattice Lattice::from_name(const std::string& name) {
  Lattice l;
  l.name_ = name;
  auto set = [&](int d, std::array<std::array<double, 3>, 3> b, bool cubic) {
    l.d_ = d;
    l.b_ = b;
    l.cubic_ = cubic;
  };
  if (name == "Z1") {
    set(1, {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, true);
  } else if (name == "Z2") {
    set(2, {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, true);
  } else if (name == "Z3") {
    set(3, {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, true);
  } else if (name == "BCC") {
    // conventional cube side a = 2^(1/3) gives unit density
    double a = std::cbrt(2.0);
    set(3,
        {{{-a / 2, a / 2, a / 2}, {a / 2, -a / 2, a / 2}, {a / 2, a / 2, -a / 2}}},
        false);
  } else if (name == "FCC") {
    double a = std::cbrt(4.0);
    set(3, {{{0, a / 2, a / 2}, {a / 2, 0, a / 2}, {a / 2, a / 2, 0}}}, false);
  } else if (name == "TRI") {
    // triangular lattice at unit density: |v1 x v2| = c^2 sqrt(3)/2 = 1
    double c = std::sqrt(2.0 / std::sqrt(3.0));
    set(2, {{{c, c / 2, 0}, {0, c * std::sqrt(3.0) / 2, 0}, {0, 0, 1}}}, false);
  } else {
    throw InputError("unknown lattice '" + name + "' (expected Z1,Z2,Z3,BCC,FCC,TRI)");
  }
  l.dual_ = inverse_transpose(l.b_, l.d_, l.det_);
  if (std::abs(std::abs(l.det_) - 1.0) > 1e-12)
    throw InputError("lattice basis is not normalized to |det| = 1");
  return l;
}

std::array<double, 3> Lattice::point(const std::array<int, 3>& z) const {
  std::array<double, 3> p{0, 0, 0};
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) p[i] += b_[i][j] * z[j];
  return p;
}

double Lattice::norm(const std::array<int, 3>& z) const {
  auto p = point(z);
  return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

std::array<double, 3> Lattice::dual_point(const std::array<int, 3>& g) const {
  std::array<double, 3> p{0, 0, 0};
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) p[i] += dual_[i][j] * g[j];
  return p;
}

double Lattice::dual_norm(const std::array<int, 3>& g) const {
  auto p = dual_point(g);
  return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

std::vector<std::array<int, 3>> Lattice::enumerate(const std::array<std::array<double, 3>, 3>& m,
                                                   double radius) const {
  // conservative per-axis bound: |z_j| <= radius * ||row j of M^-1||
  double det;
  auto minv_t = inverse_transpose(m, d_, det); // rows of this are columns of M^-1
  std::array<int, 3> zmax{0, 0, 0};
  for (int j = 0; j < d_; ++j) {
    double n = 0;
    for (int i = 0; i < d_; ++i) n += minv_t[i][j] * minv_t[i][j];
    zmax[j] = static_cast<int>(std::floor(radius * std::sqrt(n))) + 1;
  }
  std::vector<std::array<int, 3>> out;
  std::array<int, 3> z{0, 0, 0};
  const double r2 = radius * radius;
  for (int a = -zmax[0]; a <= zmax[0]; ++a)
    for (int b = (d_ > 1 ? -zmax[1] : 0); b <= (d_ > 1 ? zmax[1] : 0); ++b)
      for (int c = (d_ > 2 ? -zmax[2] : 0); c <= (d_ > 2 ? zmax[2] : 0); ++c) {
        z = {a, b, c};
        if (a == 0 && b == 0 && c == 0) continue;
        std::array<double, 3> p{0, 0, 0};
        for (int i = 0; i < d_; ++i)
          for (int j = 0; j < d_; ++j) p[i] += m[i][j] * z[j];
        if (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= r2) out.push_back(z);
      }
  return out;
}

std::vector<std::array<int, 3>> Lattice::points_within(double radius) const {
  return enumerate(b_, radius);
}

std::vector<std::array<int, 3>> Lattice::dual_points_within(double radius) const {
  return enumerate(dual_, radius);
}

std::vector<std::array<int, 3>> Lattice::points_in_cube(double L) const {
  // half-open cube [-L/2, L/2)^d
  double rad = L * 0.5 * std::sqrt(double(d_)) + 1.0;
  double det;
  auto binv_t = inverse_transpose(b_, d_, det);
  std::array<int, 3> zmax{0, 0, 0};
  for (int j = 0; j < d_; ++j) {
    double n = 0;
    for (int i = 0; i < d_; ++i) n += binv_t[i][j] * binv_t[i][j];
    zmax[j] = static_cast<int>(std::floor(rad * std::sqrt(n))) + 1;
  }
  std::vector<std::array<int, 3>> out;
  for (int a = -zmax[0]; a <= zmax[0]; ++a)
    for (int b = (d_ > 1 ? -zmax[1] : 0); b <= (d_ > 1 ? zmax[1] : 0); ++b)
      for (int c = (d_ > 2 ? -zmax[2] : 0); c <= (d_ > 2 ? zmax[2] : 0); ++c) {
        std::array<int, 3> z{a, b, c};
        auto p = point(z);
        bool in = true;
        for (int i = 0; i < d_; ++i)
          if (!(p[i] >= -L / 2 && p[i] < L / 2)) in = false;
        if (in) out.push_back(z);
      }
  return out;
}

} // namespace dfl
