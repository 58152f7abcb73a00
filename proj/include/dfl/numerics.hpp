#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace dfl {

// Gauss-Legendre nodes/weights on [-1,1]; cached per order.
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};
const GaussRule& gauss_rule(int order);

// integral of f over [a,b] with a single Gauss panel
double gauss_integrate(const std::function<double(double)>& f, double a, double b, int order);

// Upper incomplete gamma Gamma(a,x) for x > 0 and any real a (downward
// recurrence below a <= 0). Relative accuracy ~1e-14 for the arguments the
// lattice sums use.
double upper_gamma(double a, double x);

// least squares fit y ~ a + b/x; returns (a, b, rms residual)
struct InverseFit {
  double limit;
  double slope;
  double residual;
};
InverseFit fit_inverse(std::span<const double> x, std::span<const double> y);

// least squares fit y ~ a + b/x + c/x^2
InverseFit fit_inverse_quadratic(std::span<const double> x, std::span<const double> y);

// least squares slope of log(y) vs log(x); returns (slope, intercept)
std::pair<double, double> loglog_slope(std::span<const double> x, std::span<const double> y);

// golden-section minimization of a unimodal f over [a,b]
std::pair<double, double> golden_min(const std::function<double(double)>& f, double a, double b,
                                     double tol = 1e-12, int max_iter = 400);

// dense-BFGS maximizer for smooth concave objectives; f fills grad and
// returns the value. Returns the best value found.
struct BfgsReport {
  double value = 0.0;
  long long iterations = 0;
  double grad_norm = 0.0;
};
BfgsReport bfgs_maximize(std::vector<double>& x,
                         const std::function<double(const std::vector<double>&, std::vector<double>&)>& f,
                         double grad_tol, int max_iter = 500);

} // namespace dfl
