#pragma once

#include <array>
#include <unordered_map>
#include <vector>

#include "dfl/kernels.hpp"
#include "dfl/lattices.hpp"

namespace dfl {

// Cell-pair and point-cell integrals of radial kernels over unit cells of a
// lattice, in cell coordinates. All singular cases are reduced to corner
// singularities and handled with a Duffy split, so plain tensor Gauss
// converges fast afterwards.

struct CellGeometry {
  int d = 1;
  std::array<std::array<double, 3>, 3> B{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  bool diagonal_identity = true;

  static CellGeometry from_lattice(const Lattice& lat);
  static CellGeometry box(const std::vector<double>& sides);

  std::array<double, 3> map(const std::array<double, 3>& t) const;
  double radius(const std::array<double, 3>& t) const;
};

// integral over t in [-1,1]^d of  prod_a (1-|t_a|) * w(|B (t+z)|)
// = the raw cell-pair integral  II_{QxQ} w(B z + a - b) da db / |Q|^2.
double cell_pair_integral(const CellGeometry& g, const std::array<int, 3>& z,
                          const InteractionKernel& w, int order = 16);

// integral over t in [-1/2,1/2]^d of  w(|B (z - t)|)
// = the point-to-cell integral  I_Q w(B z - y) dy / |Q|.
double point_cell_integral(const CellGeometry& g, const std::array<int, 3>& z,
                           const InteractionKernel& w, int order = 16);

// B_n-weighted cell integrals: order 1 is the point-cell box weight, 2 the
// cell-pair triangle, 3 and 4 the smeared variants the fluid-wrapped
// crystal's density bookkeeping needs
double spline_pair_integral(const CellGeometry& g, const std::array<int, 3>& z,
                            const InteractionKernel& w, int spline_order, int order = 16);
double spline_pair_far(const CellGeometry& g, const std::array<int, 3>& z,
                       const InteractionKernel& w, int spline_order,
                       double* error_estimate = nullptr);

// far-field multipole values (midpoint + second/fourth moment corrections);
// used beyond |z|_inf = 2 by the cached tables
double cell_pair_far(const CellGeometry& g, const std::array<int, 3>& z,
                     const InteractionKernel& w, double* error_estimate = nullptr);
double point_cell_far(const CellGeometry& g, const std::array<int, 3>& z,
                      const InteractionKernel& w, double* error_estimate = nullptr);

// Cached tables over integer cell differences. ensure() bulk-fills in
// parallel with a deterministic layout; lookups afterwards are const.
class PairTables {
public:
  PairTables(const Lattice& lat, const InteractionKernel& w, int order = 16, int near_range = 2);

  void ensure(const std::vector<std::array<int, 3>>& diffs);
  double cell_cell(const std::array<int, 3>& z) const;
  double point_cell(const std::array<int, 3>& z) const;
  double far_error() const { return far_error_; }

private:
  CellGeometry geom_;
  InteractionKernel w_;
  int order_;
  int near_range_;
  double far_error_ = 0.0;
  std::unordered_map<long long, double> cc_;
  std::unordered_map<long long, double> pc_;

  double compute_cc(const std::array<int, 3>& z, double* err);
  double compute_pc(const std::array<int, 3>& z, double* err);
};

long long pack_z(const std::array<int, 3>& z);

} // namespace dfl
