#pragma once

#include <optional>
#include <vector>

#include "dfl/kernels.hpp"
#include "dfl/model.hpp"
#include "dfl/simplex.hpp"

namespace dfl {

// Symmetric coupling over n-fold cell products. A sorted index tuple stands
// for its whole permutation orbit and carries the orbit's total mass, so
// plan masses sum to one.
struct CouplingPlan {
  int n = 0;
  std::vector<std::pair<std::vector<int>, double>> entries;

  double total_mass() const;
  // expected particle count per cell: sum over tuples of (multiplicity of
  // the cell in the tuple) * mass
  std::vector<double> marginal(std::size_t cells) const;
};

struct GrandCanonicalPlan {
  int n_max = 0;
  double vacuum_mass = 0.0;
  std::vector<CouplingPlan> sectors; // index k holds the (k+1)-particle sector
  std::vector<double> sector_masses() const;
  int largest_active_sector(double tol = 1e-12) const;
};

struct KantorovichPotential {
  std::vector<double> v;
  double objective = 0.0; // -sum v . m
};

struct MmotOptions {
  long long budget = 200'000; // cap on M^n
  bool forbid_diagonal = false;
  long long max_lp_iterations = 2'000'000;
};

struct MmotResult {
  CouplingPlan plan;
  double value = 0.0;
  KantorovichPotential potential;
  double lp_gap = 0.0;
  long long iterations = 0;
};

enum class SceSolver { lp, sinkhorn };

MmotResult solve_mmot(const DiscreteDensity& rho, int n, const InteractionKernel& w,
                      const MmotOptions& opt = {});

struct SinkhornOptions {
  double eps_min_fraction = 1e-3; // of the cost scale
  int eps_levels = 10;
  int max_iter_per_eps = 4000;
  double marginal_tol = 1e-10;
  long long budget = 50'000;
};

struct SinkhornResult {
  double value = 0.0;
  double marginal_error = 0.0;
  std::vector<double> eps_schedule;
  long long iterations = 0;
};

SinkhornResult sinkhorn_mmot(const DiscreteDensity& rho, int n, const InteractionKernel& w,
                             const SinkhornOptions& opt = {});

struct MongeResult {
  double value = 0.0;          // continuum quadrature value of the block maps
  double plan_cost = 0.0;      // the same plan priced with the grid cost model;
                               // feasible for the LP, so >= the LP optimum
  std::vector<double> splits;  // r_0 .. r_n, unit-mass block boundaries
  CouplingPlan plan;
};

// Exact one-dimensional solver: unit-mass blocks, inverse-CDF quantile maps,
// per-segment Gauss quadrature with breakpoints at the cell edges.
MongeResult monge_1d(const DiscreteDensity& rho, int n, const InteractionKernel& w,
                     int quad_order = 32);

struct GcMmotResult {
  GrandCanonicalPlan plan;
  double value = 0.0;
  std::vector<double> duals; // cell duals + mass dual appended
  double lp_gap = 0.0;
};

GcMmotResult solve_gc_mmot(const DiscreteDensity& rho, int n_max, const InteractionKernel& w,
                           const MmotOptions& opt = {});

// (1/2) II w rho rho with the intra-cell average on the diagonal
double hartree(const DiscreteDensity& rho, const InteractionKernel& w);

enum class SceMethod { automatic, lp, monge };
double sce_value(const DiscreteDensity& rho, int n, const InteractionKernel& w,
                 SceMethod method = SceMethod::automatic, const MmotOptions& opt = {});

double indirect_energy(const DiscreteDensity& rho, int n, const InteractionKernel& w,
                       SceMethod method = SceMethod::automatic, const MmotOptions& opt = {});

double decorrelated_upper(const DiscreteDensity& rho, int n, const InteractionKernel& w);

// needs a kernel with nonnegative Fourier transform and finite w(0)
double onsager_lower(const DiscreteDensity& rho, const InteractionKernel& w);

struct LoRatioReport {
  double ratio = 0.0;
  double bracket_lower = 0.0;
  std::optional<double> bracket_upper;
};
LoRatioReport lieb_oxford_ratio(const DiscreteDensity& rho, const InteractionKernel& w,
                                SceMethod method = SceMethod::automatic,
                                const MmotOptions& opt = {});

struct SupportReport {
  double min_tuple_slack = 0.0;        // min over all tuples of c(T) + sum v
  double max_support_excess = 0.0;     // worst slack above the minimum on the support
  double mass_checked = 0.0;
  bool ok = false;
};
SupportReport verify_support(const CouplingPlan& plan, const KantorovichPotential& pot,
                             const DiscreteDensity& rho, const InteractionKernel& w, double tol,
                             const MmotOptions& opt = {});

} // namespace dfl
