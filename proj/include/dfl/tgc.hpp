#pragma once

#include <vector>

#include "dfl/linalg.hpp"
#include "dfl/model.hpp"

namespace dfl {

// Plane-wave kinetic matrix (1/2)(-Laplacian) on a periodic grid, real
// symmetric in the site basis; the constant vector spans its kernel.
Matrix kinetic_matrix(const Grid& grid);

// signed momentum components and |k|^2 list matching kinetic_matrix
std::vector<double> momentum_sq_list(const Grid& grid);

// derivative quadratic form value  (1/2) sum_cells h |grad sqrt(rho)|^2
// evaluated through the same spectral operator (the equality case of the
// one-particle bound)
double sqrt_gradient_energy(const DiscreteDensity& rho);

struct DualAscentReport {
  std::vector<double> v; // site potential on the support cells
  std::vector<std::size_t> support;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  std::vector<double> temperature_trace;
  long long iterations = 0;
  bool converged = false;
  double marginal_residual = 0.0; // before the exact-marginal repair
};

struct TgcOptions {
  double tau_min = 1e-8;
  double tau_start = 1.0;
  int max_newton_per_stage = 60;
  std::size_t max_sites = 400;
};

struct TgcResult {
  double value = 0.0; // certified primal (upper end of the bracket)
  Matrix gamma;       // full-grid density matrix with exact marginal
  DualAscentReport report;
};

// Convex minimal kinetic energy over density matrices 0 <= gamma <= 1 with
// prescribed cell masses, by temperature-annealed Newton ascent on the
// concave dual. Cells with zero mass are eliminated exactly.
TgcResult solve_tgc(const DiscreteDensity& rho, double tol = 1e-8, const TgcOptions& opt = {});

// core solver on an arbitrary symmetric one-body matrix
TgcResult tgc_solve_matrix(const Matrix& k, const std::vector<double>& masses, double tol,
                           const TgcOptions& opt = {});

// translation-invariant projector onto the lowest plane-wave shell with
// constant density rho0 (rho0 * volume must fill closed shells exactly)
struct FreeFermiResult {
  Matrix gamma;
  double energy = 0.0;
  int modes = 0;
};
FreeFermiResult free_fermi(const Grid& grid, double rho0);

struct MarchYoungResult {
  std::vector<double> phase_indices; // integers for odd n, half-integers for even n
  double value = 0.0;                // kinetic energy of the orbital set
  double tf_term = 0.0;              // phase part, (2 pi^2 / n^3) sum k^2 * int rho^3
  double gradient_term = 0.0;        // (1/2) int |(sqrt rho)'|^2
  double orthonormality_error = 0.0; // max |<phi_m, phi_n> - delta| via exact
                                     // per-cell phase integrals
};
// d=1 determinant upper bound from amplitude sqrt(rho/n) and winding phases
MarchYoungResult march_young(const DiscreteDensity& rho, int n);

struct LayerCakeResult {
  Matrix gamma;
  double energy = 0.0;
  double epsilon_theory = 0.0;   // delta + delta^2/3
  double gradient_coefficient = 0.0;
  double marginal_residual = 0.0; // before repair
  double max_eigenvalue = 0.0;
  double min_eigenvalue = 0.0;
};
// one-particle density matrix assembled from free-Fermi projectors weighted
// by a normalized window eta_delta on [1, 1+delta]; exact in the level
// integral (piecewise-constant segments)
LayerCakeResult layer_cake_dm(const DiscreteDensity& rho, double delta = 0.5);

// slack of Tr(K gamma) >= (1/2) int |grad sqrt(rho_gamma)|^2
double hoffmann_ostenhof_slack(const Grid& grid, const Matrix& gamma);

// slack of Tr(K gamma) >= c_TF(d) 1.456^{-2/d} q^{-2/d} int rho^{1+2/d}
double lieb_thirring_slack(const Grid& grid, const Matrix& gamma, double q = 1.0);

// slack of T >= c_TF(d) |Omega|^{-2/d} (int rho)^{1+2/d} for a density
// supported on a sub-box of measure |Omega|
double li_yau_slack(const DiscreteDensity& rho, double kinetic_value);

struct KineticBracket {
  double lower = 0.0;
  double upper = 0.0;
};
// two-sided local-approximation bracket with gradient corrections; kappa
// and kappa_prime are free parameters (defaults 1)
KineticBracket lda_kinetic_bracket(const DiscreteDensity& rho, double eps, double q = 1.0,
                                   double kappa = 1.0, double kappa_prime = 1.0);

} // namespace dfl
