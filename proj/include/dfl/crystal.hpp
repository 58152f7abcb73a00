#pragma once

#include <array>
#include <vector>

#include "dfl/cellint.hpp"
#include "dfl/kernels.hpp"
#include "dfl/lattices.hpp"

namespace dfl {

// lattice points inside the half-open cube [-L/2, L/2)^d
struct FiniteCrystal {
  Lattice lattice;
  double L = 0.0;
  std::vector<std::array<int, 3>> zs;     // integer coordinates
  std::vector<std::array<double, 3>> pts; // Cartesian positions
  long long count() const { return static_cast<long long>(zs.size()); }
};

FiniteCrystal finite_crystal(const Lattice& lat, double L);

// (1/2) sum_{p != q} w(|p - q|), OpenMP kernel + serial reference
double pair_sum(const std::vector<std::array<double, 3>>& pts, int d, const InteractionKernel& w);
double pair_sum_serial(const std::vector<std::array<double, 3>>& pts, int d,
                       const InteractionKernel& w);

// (1/2) II_{(C_L)^2} w(x - y) dx dy over the cube of side L
double box_self_integral(int d, const InteractionKernel& w, double L, int order = 48);

struct CrystalEnergyBreakdown {
  double L = 0.0;
  double effective_volume = 0.0; // N for floating/clamped, |C'_L| for modified
  long long N = 0;
  double pair_term = 0.0;
  double continuum_term = 0.0;
  double per_volume = 0.0;
  double error_estimate = 0.0;
};

// indirect energy of the cell-averaged crystal: pair sum minus the
// self-energy of the union of occupied cells, per particle
CrystalEnergyBreakdown floating_indirect(const Lattice& lat, double L, const InteractionKernel& w,
                                         int order = 16);

// neutral-background energy with points clamped at the cell centers
CrystalEnergyBreakdown jellium_clamped(const Lattice& lat, double L, const InteractionKernel& w,
                                       int order = 16);

// crystal translated over one cell inside a slightly larger container, the
// rest filled with an uncorrelated unit-density fluid; margin >= diameter
// of the unit cell
CrystalEnergyBreakdown floating_modified(const Lattice& lat, double L, double margin,
                                         const InteractionKernel& w, int order = 16,
                                         int y_points_per_axis = 4);

// exact prism potential  I_box 1/|p - r'| dr'  for an axis-aligned box
double coulomb_box_potential(const std::array<double, 3>& p, const std::array<double, 3>& lo,
                             const std::array<double, 3>& hi);

struct SweepFit {
  std::vector<double> Ls;
  std::vector<double> values;
  double limit = 0.0;
  double slope = 0.0;
  double residual = 0.0;
};

enum class CrystalMode { floating, clamped, modified };

SweepFit crystal_sweep(const Lattice& lat, CrystalMode mode, const InteractionKernel& w,
                       const std::vector<double>& Ls, bool fit, double margin = 2.0,
                       int order = 16);

} // namespace dfl
