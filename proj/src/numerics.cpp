#include "dfl/numerics.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace dfl {

namespace {

GaussRule make_gauss(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  // Newton iteration on Legendre polynomials, symmetric nodes
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    r.w[n - 1 - i] = r.w[i];
  }
  return r;
}

std::map<int, GaussRule> g_rules;
std::mutex g_rules_mutex;

} // namespace

const GaussRule& gauss_rule(int order) {
  if (order < 1) throw std::invalid_argument("gauss_rule: order must be >= 1");
  std::lock_guard<std::mutex> lock(g_rules_mutex);
  auto it = g_rules.find(order);
  if (it == g_rules.end()) it = g_rules.emplace(order, make_gauss(order)).first;
  return it->second;
}

double gauss_integrate(const std::function<double(double)>& f, double a, double b, int order) {
  const GaussRule& r = gauss_rule(order);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < order; ++i) s += r.w[i] * f(mid + half * r.x[i]);
  return s * half;
}

namespace {

// continued fraction for Gamma(a,x), x > a+1 roughly (modified Lentz)
double upper_gamma_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x)) * h;
}

// series for lower gamma, then Gamma(a,x) = Gamma(a) - lower
double lower_gamma_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x));
}

} // namespace

namespace {

// Gamma(0,x) = E1(x)
double expint_e1(double x) {
  if (x >= 1.0) return upper_gamma_cf(0.0, x);
  const double euler = 0.57721566490153286060651209;
  double sum = 0.0, term = 1.0;
  for (int k = 1; k < 80; ++k) {
    term *= -x / k;
    double add = -term / k;
    sum += add;
    if (std::abs(add) < 1e-18 * (1.0 + std::abs(sum))) break;
  }
  return -euler - std::log(x) + sum;
}

} // namespace

double upper_gamma(double a, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("upper_gamma: x must be > 0");
  if (a <= 0.0) {
    // descend from the fractional part with
    // Gamma(a-1,x) = (Gamma(a,x) - x^{a-1} e^{-x}) / (a-1)
    double a0 = a - std::floor(a); // in [0,1)
    int steps = static_cast<int>(std::llround(a0 - a));
    double g = (a0 == 0.0) ? expint_e1(x) : upper_gamma(a0, x);
    for (int j = 1; j <= steps; ++j) {
      double an = a0 - j;
      g = (g - std::exp(an * std::log(x) - x)) / an;
    }
    return g;
  }
  if (x < a + 1.0) return std::tgamma(a) - lower_gamma_series(a, x);
  return upper_gamma_cf(a, x);
}

InverseFit fit_inverse(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_inverse: need >= 2 points");
  const std::size_t n = x.size();
  double su = 0, suu = 0, sy = 0, suy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double u = 1.0 / x[i];
    su += u;
    suu += u * u;
    sy += y[i];
    suy += u * y[i];
  }
  double det = n * suu - su * su;
  InverseFit f{};
  f.limit = (suu * sy - su * suy) / det;
  f.slope = (n * suy - su * sy) / det;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - (f.limit + f.slope / x[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

InverseFit fit_inverse_quadratic(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (x.size() != y.size() || n < 3)
    throw std::invalid_argument("fit_inverse_quadratic: need >= 3 points");
  // normal equations for [1, 1/x, 1/x^2]
  double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double r[3] = {0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    double u = 1.0 / x[i];
    double basis[3] = {1.0, u, u * u};
    for (int a = 0; a < 3; ++a) {
      r[a] += basis[a] * y[i];
      for (int b = 0; b < 3; ++b) m[a][b] += basis[a] * basis[b];
    }
  }
  // solve 3x3
  double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  auto det3 = [&](int col) {
    double mm[3][3];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) mm[a][b] = (b == col) ? r[a] : m[a][b];
    return mm[0][0] * (mm[1][1] * mm[2][2] - mm[1][2] * mm[2][1]) -
           mm[0][1] * (mm[1][0] * mm[2][2] - mm[1][2] * mm[2][0]) +
           mm[0][2] * (mm[1][0] * mm[2][1] - mm[1][1] * mm[2][0]);
  };
  InverseFit f{};
  f.limit = det3(0) / det;
  f.slope = det3(1) / det;
  double c2 = det3(2) / det;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double u = 1.0 / x[i];
    double pred = f.limit + f.slope * u + c2 * u * u;
    ss += (y[i] - pred) * (y[i] - pred);
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

std::pair<double, double> loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("loglog_slope: need >= 2 points");
  double sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sxx += lx * lx;
    sy += ly;
    sxy += lx * ly;
  }
  double det = n * sxx - sx * sx;
  double slope = (n * sxy - sx * sy) / det;
  double icpt = (sy - slope * sx) / n;
  return {slope, icpt};
}

std::pair<double, double> golden_min(const std::function<double(double)>& f, double a, double b,
                                     double tol, int max_iter) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < max_iter && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

BfgsReport bfgs_maximize(
    std::vector<double>& x,
    const std::function<double(const std::vector<double>&, std::vector<double>&)>& f,
    double grad_tol, int max_iter) {
  const std::size_t n = x.size();
  std::vector<double> g(n), gn(n), xn(n), p(n), s(n), yv(n);
  std::vector<double> H(n * n, 0.0); // inverse Hessian approx (of -f)
  for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
  double val = f(x, g);
  BfgsReport rep;
  for (int it = 0; it < max_iter; ++it) {
    double gnorm = 0.0;
    for (double v : g) gnorm = std::max(gnorm, std::abs(v));
    rep.grad_norm = gnorm;
    if (gnorm <= grad_tol) break;
    // ascent direction p = H g
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += H[i * n + j] * g[j];
      p[i] = acc;
    }
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) slope += p[i] * g[i];
    if (slope <= 0.0) { // reset
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) H[i * n + j] = (i == j) ? 1.0 : 0.0;
      p = g;
      slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope += g[i] * g[i];
    }
    double step = 1.0;
    double vn = val;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + step * p[i];
      vn = f(xn, gn);
      if (vn >= val + 1e-4 * step * slope) break;
      step *= 0.5;
    }
    ++rep.iterations;
    if (!(vn > val - 1e-18)) break; // no progress
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      yv[i] = -(gn[i] - g[i]); // gradient of -f
    }
    double sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) sy += s[i] * yv[i];
    if (sy > 1e-14) {
      // BFGS update of the inverse Hessian of -f
      std::vector<double> Hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += H[i * n + j] * yv[j];
        Hy[i] = acc;
      }
      double yHy = 0.0;
      for (std::size_t i = 0; i < n; ++i) yHy += yv[i] * Hy[i];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          H[i * n + j] += (sy + yHy) * s[i] * s[j] / (sy * sy) -
                          (Hy[i] * s[j] + s[i] * Hy[j]) / sy;
        }
    }
    x = xn;
    g = gn;
    val = vn;
  }
  rep.value = val;
  return rep;
}

} // namespace dfl
