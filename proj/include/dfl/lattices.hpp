#pragma once

#include <array>
#include <string>
#include <vector>

namespace dfl {

// Bravais lattice with |det B| = 1 (unit density). Points are B * z for
// integer vectors z; columns of B are the basis vectors. The unit cell is
// the parallelepiped spanned by B centered at the origin.
class Lattice {
public:
  static Lattice from_name(const std::string& name); // Z1 Z2 Z3 BCC FCC TRI

  const std::string& name() const { return name_; }
  int dim() const { return d_; }
  // point = B z
  std::array<double, 3> point(const std::array<int, 3>& z) const;
  double norm(const std::array<int, 3>& z) const;
  const std::array<std::array<double, 3>, 3>& basis() const { return b_; }
  // dual basis D = B^{-T}; dual points are D g, g integer
  const std::array<std::array<double, 3>, 3>& dual_basis() const { return dual_; }
  std::array<double, 3> dual_point(const std::array<int, 3>& g) const;
  double dual_norm(const std::array<int, 3>& g) const;
  bool cubic_cell() const { return cubic_; } // B == identity

  // All z != 0 with |B z| <= radius, deterministic lexicographic order.
  std::vector<std::array<int, 3>> points_within(double radius) const;
  std::vector<std::array<int, 3>> dual_points_within(double radius) const;

  // Lattice points in the half-open cube [-L/2, L/2)^d, lexicographic in z.
  std::vector<std::array<int, 3>> points_in_cube(double L) const;

private:
  Lattice() = default;
  std::string name_;
  int d_ = 0;
  bool cubic_ = false;
  std::array<std::array<double, 3>, 3> b_{};
  std::array<std::array<double, 3>, 3> dual_{};
  double det_ = 1.0;

  std::vector<std::array<int, 3>> enumerate(const std::array<std::array<double, 3>, 3>& m,
                                            double radius) const;
};

} // namespace dfl
