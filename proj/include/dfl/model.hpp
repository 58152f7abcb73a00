#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace dfl {

enum class Boundary { open, periodic };

// Uniform cell grid on a box [0,l_1) x ... x [0,l_d). Densities are stored
// as cell masses; pointwise values are mass / cell volume.
class Grid {
public:
  Grid(std::vector<std::size_t> cells, std::vector<double> lengths,
       Boundary boundary = Boundary::open);

  static Grid line(std::size_t m, double length, Boundary boundary = Boundary::open);

  int dim() const { return static_cast<int>(cells_.size()); }
  std::size_t cells(int axis) const { return cells_[axis]; }
  double length(int axis) const { return lengths_[axis]; }
  Boundary boundary() const { return boundary_; }
  std::size_t size() const { return total_; }
  double cell_volume() const { return cell_volume_; }
  double spacing(int axis) const { return lengths_[axis] / double(cells_[axis]); }

  // lexicographic index <-> per-axis multi-index <-> cell center
  std::vector<std::size_t> unravel(std::size_t index) const;
  std::size_t ravel(const std::vector<std::size_t>& multi) const;
  std::vector<double> center(std::size_t index) const;

  // displacement between cell centers; minimum image in periodic mode
  double distance(std::size_t i, std::size_t j) const;

  bool same_shape(const Grid& other) const;

private:
  std::vector<std::size_t> cells_;
  std::vector<double> lengths_;
  Boundary boundary_;
  std::size_t total_;
  double cell_volume_;
};

class DiscreteDensity {
public:
  DiscreteDensity(Grid grid, std::vector<double> masses);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& masses() const { return masses_; }
  double mass(std::size_t i) const { return masses_[i]; }
  double value(std::size_t i) const { return masses_[i] / grid_.cell_volume(); }
  std::size_t size() const { return masses_.size(); }

  double total_mass() const;                 // the particle number, integral of rho
  double power_integral(double p) const;     // sum  h * rho_i^p

private:
  Grid grid_;
  std::vector<double> masses_;
};

// Midpoint-rule sampling: mass_i = profile(center_i) * h. Rejects negative
// profile values, reporting the offending coordinate.
DiscreteDensity density_from_function(const Grid& grid,
                                      const std::function<double(const std::vector<double>&)>& profile);

// Dilation rho -> lambda^d rho(lambda .): lengths divided by lambda, masses
// unchanged. Total mass is invariant.
DiscreteDensity rescale_density(const DiscreteDensity& rho, double lambda);

std::string format_coordinate(const std::vector<double>& x);

} // namespace dfl
