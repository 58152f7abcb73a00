#pragma once

#include <vector>

#include "dfl/kernels.hpp"
#include "dfl/linalg.hpp"
#include "dfl/model.hpp"

namespace dfl {

// Periodic ring of fermion sites with the spectral one-body kinetic matrix
// and a radial pair interaction evaluated at minimum-image site distances.
struct LatticeSystem {
  Grid grid;
  Matrix kinetic;
  Matrix pair_w; // diagonal unused (Pauli exclusion)
  double coupling = 0.0;
};

LatticeSystem make_ring_system(int sites, const InteractionKernel& w, double coupling);

// occupation-number basis of the n-particle sector, bitmasks ascending
std::vector<unsigned> sector_basis(int sites, int n);

Matrix sector_hamiltonian(const LatticeSystem& sys, const std::vector<double>& v, int n);

struct SectorGround {
  double energy = 0.0;
  std::vector<double> density; // degeneracy-averaged site occupations
  int degeneracy = 1;
};
SectorGround sector_ground(const LatticeSystem& sys, const std::vector<double>& v, int n);

struct SpectrumTable {
  std::vector<double> energies;   // E_n, n = 0..M
  std::vector<int> degeneracies;
};
SpectrumTable sector_energies(const LatticeSystem& sys, const std::vector<double>& v);

// lower convex hull of (n, E_n) evaluated at fractional particle number
double gc_hull_energy(const std::vector<double>& energies, double lambda);

struct ConvexityReport {
  std::vector<double> energies;
  bool convex = true;
  double max_violation = 0.0;      // max of (E_{n-1}+E_{n+1})/2 - E_n below 0
  double max_interp_error = 0.0;   // hull vs linear interpolation at quarter points
};
ConvexityReport convexity_scan(const LatticeSystem& sys, const std::vector<double>& v);

enum class DualMode { canonical, grand };

struct FockDualResult {
  double dual = 0.0;    // certified lower bound
  double primal = 0.0;  // mixture upper bound (valid when residual is tiny)
  double gap = 0.0;
  double mixture_residual = 0.0;
  std::vector<double> v;
  std::vector<double> sector_weights;
  long long iterations = 0;
  bool converged = false;
};

// Legendre dual of the lattice functional: maximize E[v] - <v, rho> by
// temperature-smoothed ascent; E is the sector ground energy (canonical)
// or the minimum over sectors (grand). The primal side re-weights the
// low-lying eigenstate densities by a small feasibility LP.
FockDualResult levy_lieb_dual(const LatticeSystem& sys, const std::vector<double>& rho,
                              DualMode mode, double tol = 1e-6);

struct CouplingPoint {
  double g = 0.0;
  double value = 0.0; // dual value of the interacting functional
  double gap = 0.0;
};
std::vector<CouplingPoint> coupling_limits(int sites, const InteractionKernel& w,
                                           const std::vector<double>& rho,
                                           const std::vector<double>& g_list, double tol = 1e-6);

struct XcReport {
  double value = 0.0;       // F_dual - T_dual - hartree
  double uncertainty = 0.0; // sum of the two dual gaps
};
XcReport exchange_correlation_gc(const LatticeSystem& sys, const std::vector<double>& rho,
                                 const InteractionKernel& w, double tol = 1e-6);

} // namespace dfl
