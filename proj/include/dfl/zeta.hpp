#pragma once

#include <string>

#include "dfl/lattices.hpp"

namespace dfl {

enum class ZetaMethod { automatic, direct, ewald };

struct ZetaResult {
  std::string lattice;
  double s = 0.0;
  double value = 0.0;
  std::string method;
  double error_estimate = 0.0;
};

// zeta_L(s) = (1/2) sum_{l != 0} |l|^{-s}. Direct shell summation for
// s > d; for 0 < s < d the analytic continuation via the incomplete-gamma
// two-sum split over the lattice and its dual (also usable for s > d as a
// cross-check). `split` is the balance parameter of the split; the value is
// independent of it within the error estimate.
ZetaResult epstein_zeta(const Lattice& lat, double s, double tol = 1e-10,
                        ZetaMethod method = ZetaMethod::automatic, double split = 1.0);

} // namespace dfl
