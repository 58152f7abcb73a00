#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dfl {

struct ConstantReport {
  std::string name;
  double value;
  std::string formula;
  std::string anchor;
};

struct Bracket {
  double lower;
  double upper;
};

// surface area of the unit sphere S^{d-1}
double sphere_area(int d);

// Thomas-Fermi constant  2 pi^2 d/(d+2) (d / |S^{d-1}|)^{2/d}
double thomas_fermi_constant(int d);

// Dirac exchange coefficient of the free Fermi gas at unit density,
//   c_D(s,d) = (2 (2pi)^d)^{-1} Int |FT(ball indicator)|^2 |r|^{-s} dr
// by radial panel quadrature with an analytic tail bound.
double dirac_constant(double s, int d, int quadrature_order = 32, double tol = 1e-7);

// (3/5)(9 pi / 2)^{1/3}
double lieb_narnhofer_constant();

// proven lower bound on the kinetic inequality constant:
// c_TF(d) * 1.456^{-2/d}
double lt_constant_lower_bound(int d);

// Bracket on the optimal interaction lower-bound constant. The lower side
// comes from lattice energies: for (1,3) the literature value 1.4442, for
// d=1 the Riemann zeta value; other cases take a caller-supplied lattice
// minimum. The upper side is only known for (1,3).
struct LoBracket {
  double lower;
  std::optional<double> upper;
};
LoBracket lo_constant_bracket(double s, int d,
                              const std::function<double(double, int)>& lattice_zeta_min = {});

// two-sided bound on the uniform-gas energy per volume at density rho0,
// d=3 Coulomb only
Bracket f_bracket(double rho0, double q, int dirac_order = 32);

enum class Regime { small, large };
struct Asymptote {
  double value;
  double lower;
  double upper;
};
Asymptote f_asymptote(double rho0, double q, Regime regime, int dirac_order = 32);

// bracket for the constant-density gas coefficient in the small-density
// regime (d=3 Coulomb): [-(3/5)(9pi/2)^{1/3}, -1.4442]
Bracket ueg_constant_bracket_13();

std::vector<ConstantReport> constants_table(int dirac_order = 32);

} // namespace dfl
