#include "dfl/constants.hpp"

#include <cmath>

#include "dfl/errors.hpp"
#include "dfl/numerics.hpp"

namespace dfl {

double sphere_area(int d) {
  if (d < 1) throw InputError("sphere_area: d >= 1");
  return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

double thomas_fermi_constant(int d) {
  if (d < 1) throw InputError("thomas_fermi_constant: d >= 1");
  return 2.0 * M_PI * M_PI * d / (d + 2.0) * std::pow(d / sphere_area(d), 2.0 / d);
}

namespace {

// |integral over the ball of radius k of e^{-i x.r}|, radial profile
double ball_ft(int d, double k, double r) {
  double u = k * r;
  switch (d) {
    case 1: return 2.0 * std::sin(u) / r;
    case 2: return 2.0 * M_PI * k * std::cyl_bessel_j(1, u) / r;
    case 3: return 4.0 * M_PI * (std::sin(u) - u * std::cos(u)) / (r * r * r);
  }
  throw InputError("ball_ft: d in {1,2,3}");
}

} // namespace

double dirac_constant(double s, int d, int quadrature_order, double tol) {
  if (!(s > 0.0) || s >= double(d)) throw InputError("dirac_constant: need 0 < s < d");
  const double ctf = thomas_fermi_constant(d);
  const double kf = std::sqrt(2.0 * (d + 2.0) * ctf / d);
  const double pref = sphere_area(d) / (2.0 * std::pow(2.0 * M_PI, 2.0 * d));

  auto integrand = [&](double r) {
    double h = ball_ft(d, kf, r);
    return h * h * std::pow(r, d - 1.0 - s);
  };

  // series head over [0, a0]: the integrand behaves like r^{d-1-s} there and
  // plain Gauss would lose digits on the power singularity
  const double a0 = 0.1 / kf;
  double head = 0.0;
  {
    double k2 = kf * kf, k4 = k2 * k2, k6 = k4 * k2;
    auto p = [&](double e) { return std::pow(a0, e) / e; };
    if (d == 1)
      head = 4.0 * k2 * (p(1 - s) - k2 * p(3 - s) / 3.0 + 2.0 * k4 * p(5 - s) / 45.0);
    else if (d == 2)
      head = 4.0 * M_PI * M_PI * k4 *
             (p(2 - s) / 4.0 - k2 * p(4 - s) / 16.0 + 5.0 * k4 * p(6 - s) / 768.0);
    else
      head = 16.0 * M_PI * M_PI * k6 *
             (p(3 - s) / 9.0 - k2 * p(5 - s) / 45.0 + k4 * p(7 - s) / 525.0);
  }

  // geometric panels up to one oscillation period, then period panels
  double acc = head;
  double a = a0;
  const double period = M_PI / kf;
  while (a < period) {
    double b = std::min(2.0 * a, period);
    acc += gauss_integrate(integrand, a, b, quadrature_order);
    a = b;
  }
  double upper = period;
  const int max_panels = 200000;
  for (int j = 1; j < max_panels; ++j) {
    double lo = upper, hi = upper + period;
    acc += gauss_integrate(integrand, lo, hi, quadrature_order);
    upper = hi;
    if (j > 8) {
      // envelope bound: h^2 r^{d-1-s} <= C r^{-2-s} for kf r >= 1, so the
      // tail integrates to C U^{-1-s}/(1+s)
      double coef = 4.0;
      if (d == 2) coef = 8.0 * M_PI * kf;
      if (d == 3) coef = 64.0 * M_PI * M_PI * kf * kf;
      double tail = pref * coef * std::pow(upper, -1.0 - s) / (1.0 + s);
      if (tail < tol * std::abs(pref * acc) && tail < tol) return pref * acc;
    }
  }
  throw ConvergenceError("dirac_constant: quadrature tail did not fall below tolerance");
}

double lieb_narnhofer_constant() { return 0.6 * std::cbrt(4.5 * M_PI); }

double lt_constant_lower_bound(int d) {
  return thomas_fermi_constant(d) * std::pow(1.456, -2.0 / d);
}

Bracket ueg_constant_bracket_13() { return {-lieb_narnhofer_constant(), -1.4442}; }

LoBracket lo_constant_bracket(double s, int d,
                              const std::function<double(double, int)>& lattice_zeta_min) {
  if (!(s > 0.0) || s >= double(d)) throw InputError("lo_constant_bracket: need 0 < s < d");
  if (d == 3 && s == 1.0) return {1.4442, 1.6358};
  if (d == 1) {
    if (!lattice_zeta_min) throw InputError("lo_constant_bracket: d=1 needs a zeta evaluator");
    return {-lattice_zeta_min(s, 1), std::nullopt};
  }
  if (lattice_zeta_min) return {-lattice_zeta_min(s, d), std::nullopt};
  throw InputError("lo_constant_bracket: no proven lower bound available without a lattice "
                   "zeta evaluator for these (s,d)");
}

Bracket f_bracket(double rho0, double q, int dirac_order) {
  if (rho0 < 0.0) throw InputError("f_bracket: rho0 must be >= 0");
  if (q < 1.0) throw InputError("f_bracket: q >= 1");
  static thread_local double cd_cache = -1.0;
  if (cd_cache < 0.0) cd_cache = dirac_constant(1.0, 3, dirac_order);
  const double ctf = thomas_fermi_constant(3);
  double tf = ctf * std::pow(q, -2.0 / 3.0) * std::pow(rho0, 5.0 / 3.0);
  double lo = tf - lieb_narnhofer_constant() * std::pow(rho0, 4.0 / 3.0);
  double hi = tf - cd_cache * std::pow(q, -1.0 / 3.0) * std::pow(rho0, 4.0 / 3.0);
  return {lo, hi};
}

Asymptote f_asymptote(double rho0, double q, Regime regime, int dirac_order) {
  if (rho0 < 0.0) throw InputError("f_asymptote: rho0 must be >= 0");
  if (regime == Regime::small) {
    Bracket c = ueg_constant_bracket_13();
    double r43 = std::pow(rho0, 4.0 / 3.0);
    double mid = 0.5 * (c.lower + c.upper);
    return {mid * r43, c.lower * r43, c.upper * r43};
  }
  Bracket b = f_bracket(rho0, q, dirac_order);
  return {b.upper, b.upper, b.upper};
}

std::vector<ConstantReport> constants_table(int dirac_order) {
  std::vector<ConstantReport> t;
  t.push_back({"c_TF(1)", thomas_fermi_constant(1), "pi^2/6", "free Fermi gas kinetic density, d=1"});
  t.push_back({"c_TF(2)", thomas_fermi_constant(2), "pi", "free Fermi gas kinetic density, d=2"});
  t.push_back({"c_TF(3)", thomas_fermi_constant(3), "(3/10)(6 pi^2)^{2/3}",
               "free Fermi gas kinetic density, d=3"});
  t.push_back({"c_D(1,3)", dirac_constant(1.0, 3, dirac_order), "(3/4)(6/pi)^{1/3}",
               "free Fermi gas exchange density, d=3 Coulomb"});
  t.push_back({"lieb_narnhofer", lieb_narnhofer_constant(), "(3/5)(9 pi/2)^{1/3}",
               "uniform-gas lower-bound constant"});
  t.push_back({"c_LT_lower(1)", lt_constant_lower_bound(1), "c_TF(1) 1.456^{-2}",
               "proven kinetic inequality constant, d=1"});
  t.push_back({"c_LT_lower(2)", lt_constant_lower_bound(2), "c_TF(2) 1.456^{-1}",
               "proven kinetic inequality constant, d=2"});
  t.push_back({"c_LT_lower(3)", lt_constant_lower_bound(3), "c_TF(3) 1.456^{-2/3}",
               "proven kinetic inequality constant, d=3"});
  t.push_back({"c_LO_lower(1,3)", 1.4442, "-zeta_BCC(1)", "interaction bound bracket, lower"});
  t.push_back({"c_LO_upper(1,3)", 1.6358, "Chan-Handy bound", "interaction bound bracket, upper"});
  return t;
}

} // namespace dfl
