#pragma once

#include <map>
#include <string>
#include <vector>

#include "dfl/kernels.hpp"
#include "dfl/model.hpp"

namespace dfl {

// |grad f|^2 per cell for a per-cell field: spectral differentiation on
// periodic grids, central differences (one-sided at the box edges) on open
// grids. Sums over axes in d > 1.
std::vector<double> gradient_sq_field(const Grid& grid, const std::vector<double>& field);

struct DensityIntegrals {
  double mass = 0.0;            // int rho
  double rho_kin = 0.0;         // int rho^{1+2/d}
  double rho_int = 0.0;         // int rho^{1+s/d} for the requested s
  double rho_sq = 0.0;          // int rho^2
  double grad_sqrt_sq = 0.0;    // int |grad sqrt(rho)|^2
  double grad_sqrt_4 = 0.0;     // int |grad sqrt(rho)|^4
  double grad_cbrt_4 = 0.0;     // int |grad rho^{1/3}|^4
  double grad_abs = 0.0;        // int |grad rho|
  std::string gradient_method;  // "spectral" or "central"
};
DensityIntegrals density_integrals(const DiscreteDensity& rho, double s = 1.0);

struct BoundReport {
  double lower = 0.0;
  double upper = 0.0;
  double eps_star = 0.0;
  std::map<std::string, double> terms;
  std::map<std::string, std::string> provenance;
};

// certified lower bound: proven kinetic constant + hartree - proven upper
// interaction constant; (s,d) must have a proven bracket upper end
BoundReport tfd_lower(const DiscreteDensity& rho, const InteractionKernel& w, double q = 1.0);

// gradient-corrected upper bound of the combined functional
BoundReport tfvw_upper(const DiscreteDensity& rho, const InteractionKernel& w, double q,
                       double eps, double kappa_prime = 1.0);

enum class LdaMode { quantum, classical };

// right-hand-side error functional of the local approximation
double lda_error(const DiscreteDensity& rho, double eps, double C, LdaMode mode);

struct EpsOpt {
  double eps_star = 0.0;
  double value = 0.0;
  double stationarity = 0.0; // |d value / d log eps| at the minimum
};
EpsOpt optimize_epsilon(const DiscreteDensity& rho, double C, LdaMode mode,
                        double eps_lo = 1e-6, double eps_hi = 1e6);

struct ExponentProbe {
  std::vector<double> n_values;
  std::vector<double> errors; // optimized error functional per N
  double slope = 0.0;         // log-log fit
};
// scaling probe under rho_N(r) = rho(N^{-1/3} r), using the exact d=3
// dilation identities of every integral
ExponentProbe exponent_probe(const DiscreteDensity& rho, const std::vector<double>& n_list,
                             LdaMode mode, double C = 1.0);

// gradient-corrected interaction lower bound (d=3 Coulomb):
// hartree - (ln_constant + eps) int rho^{4/3} - (0.001206/eps^3) int |grad rho|
BoundReport gradient_interaction_lower(const DiscreteDensity& rho, double eps);

} // namespace dfl
