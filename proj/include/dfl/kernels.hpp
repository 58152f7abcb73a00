#pragma once

#include <functional>
#include <string>

#include "dfl/linalg.hpp"
#include "dfl/model.hpp"

namespace dfl {

// Radial pair interaction w(r), r > 0.
class InteractionKernel {
public:
  enum class Kind { riesz, neg_abs, gaussian, custom };

  static InteractionKernel riesz(double s);
  static InteractionKernel coulomb3d(); // riesz(1), the d=3 physical case
  static InteractionKernel neg_abs();   // w(r) = -r, d=1
  static InteractionKernel gaussian(double alpha);
  static InteractionKernel custom(std::function<double(double)> w, bool fourier_nonneg);

  Kind kind() const { return kind_; }
  double exponent() const { return s_; } // riesz only
  double alpha() const { return alpha_; }
  bool fourier_nonneg() const { return fourier_nonneg_; }
  const std::string& name() const { return name_; }

  double operator()(double r) const;

  // w(0); throws for kernels diverging at the origin
  double at_zero() const;

  // cell self-average integrable in dimension d (riesz needs s < d)
  bool integrable_self(int d) const;

private:
  Kind kind_ = Kind::riesz;
  double s_ = 1.0;
  double alpha_ = 1.0;
  bool fourier_nonneg_ = false;
  std::string name_;
  std::function<double(double)> fn_;
};

// parse "riesz:0.5", "coulomb3d", "negabs", "gaussian:1.0"
InteractionKernel parse_kernel(const std::string& text);

// Mean of w over a pair of identical box cells with sides h[a]
// (the intra-cell averaged diagonal value).
double cell_self_average(const InteractionKernel& kernel, const std::vector<double>& h);

// Pair cost matrix on the grid: w at center distances off the diagonal
// (minimum image when periodic), the intra-cell average on the diagonal.
// With allow_nonintegrable_diagonal the diagonal becomes +infinity instead
// of rejecting riesz s >= d; transport solvers then exclude same-cell
// tuples.
Matrix kernel_matrix(const Grid& grid, const InteractionKernel& kernel,
                     bool allow_nonintegrable_diagonal = false);

} // namespace dfl
