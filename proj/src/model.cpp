#include "dfl/model.hpp"

#include <cmath>
#include <sstream>

#include "dfl/errors.hpp"

namespace dfl {

Grid::Grid(std::vector<std::size_t> cells, std::vector<double> lengths, Boundary boundary)
    : cells_(std::move(cells)), lengths_(std::move(lengths)), boundary_(boundary) {
  if (cells_.empty() || cells_.size() > 3 || cells_.size() != lengths_.size())
    throw InputError("Grid: dimension must be 1, 2 or 3 with matching lengths");
  total_ = 1;
  cell_volume_ = 1.0;
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    if (cells_[a] < 1) throw InputError("Grid: cell count must be >= 1");
    if (!(lengths_[a] > 0.0)) throw InputError("Grid: length must be > 0");
    total_ *= cells_[a];
    cell_volume_ *= lengths_[a] / double(cells_[a]);
  }
}

Grid Grid::line(std::size_t m, double length, Boundary boundary) {
  return Grid({m}, {length}, boundary);
}

std::vector<std::size_t> Grid::unravel(std::size_t index) const {
  std::vector<std::size_t> multi(cells_.size());
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    multi[a] = index % cells_[a];
    index /= cells_[a];
  }
  return multi;
}

std::size_t Grid::ravel(const std::vector<std::size_t>& multi) const {
  std::size_t index = 0;
  for (std::size_t a = cells_.size(); a-- > 0;) index = index * cells_[a] + multi[a];
  return index;
}

std::vector<double> Grid::center(std::size_t index) const {
  auto multi = unravel(index);
  std::vector<double> x(cells_.size());
  for (std::size_t a = 0; a < cells_.size(); ++a)
    x[a] = (double(multi[a]) + 0.5) * lengths_[a] / double(cells_[a]);
  return x;
}

double Grid::distance(std::size_t i, std::size_t j) const {
  auto xi = center(i), xj = center(j);
  double s = 0.0;
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    double d = std::abs(xi[a] - xj[a]);
    if (boundary_ == Boundary::periodic) d = std::min(d, lengths_[a] - d);
    s += d * d;
  }
  return std::sqrt(s);
}

bool Grid::same_shape(const Grid& other) const {
  if (cells_ != other.cells_ || boundary_ != other.boundary_) return false;
  for (std::size_t a = 0; a < lengths_.size(); ++a)
    if (std::abs(lengths_[a] - other.lengths_[a]) > 1e-12 * lengths_[a]) return false;
  return true;
}

DiscreteDensity::DiscreteDensity(Grid grid, std::vector<double> masses)
    : grid_(std::move(grid)), masses_(std::move(masses)) {
  if (masses_.size() != grid_.size())
    throw InputError("DiscreteDensity: mass vector does not match grid");
  for (std::size_t i = 0; i < masses_.size(); ++i)
    if (masses_[i] < 0.0 || !std::isfinite(masses_[i]))
      throw InputError("DiscreteDensity: negative or non-finite mass in cell " +
                       std::to_string(i));
}

double DiscreteDensity::total_mass() const {
  double s = 0.0;
  for (double m : masses_) s += m;
  return s;
}

double DiscreteDensity::power_integral(double p) const {
  const double h = grid_.cell_volume();
  double s = 0.0;
  for (double m : masses_) s += h * std::pow(m / h, p);
  return s;
}

DiscreteDensity density_from_function(
    const Grid& grid, const std::function<double(const std::vector<double>&)>& profile) {
  std::vector<double> masses(grid.size());
  const double h = grid.cell_volume();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto x = grid.center(i);
    double v = profile(x);
    if (v < 0.0 || !std::isfinite(v))
      throw InputError("density_from_function: negative profile value at " + format_coordinate(x));
    masses[i] = v * h;
  }
  return DiscreteDensity(grid, std::move(masses));
}

DiscreteDensity rescale_density(const DiscreteDensity& rho, double lambda) {
  if (!(lambda > 0.0)) throw InputError("rescale_density: lambda must be > 0");
  const Grid& g = rho.grid();
  std::vector<std::size_t> cells(g.dim());
  std::vector<double> lengths(g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    cells[a] = g.cells(a);
    lengths[a] = g.length(a) / lambda;
  }
  return DiscreteDensity(Grid(cells, lengths, g.boundary()), rho.masses());
}

std::string format_coordinate(const std::vector<double>& x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t a = 0; a < x.size(); ++a) os << (a ? ", " : "") << x[a];
  os << ")";
  return os.str();
}

} // namespace dfl
