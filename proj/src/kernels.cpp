#include "dfl/kernels.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "dfl/cellint.hpp"
#include "dfl/errors.hpp"

namespace dfl {

InteractionKernel InteractionKernel::riesz(double s) {
  if (!(s > 0.0)) throw InputError("riesz kernel: exponent must be > 0");
  InteractionKernel k;
  k.kind_ = Kind::riesz;
  k.s_ = s;
  std::ostringstream os;
  os << "riesz:" << s;
  k.name_ = os.str();
  return k;
}

InteractionKernel InteractionKernel::coulomb3d() {
  InteractionKernel k = riesz(1.0);
  k.name_ = "coulomb3d";
  return k;
}

InteractionKernel InteractionKernel::neg_abs() {
  InteractionKernel k;
  k.kind_ = Kind::neg_abs;
  k.name_ = "negabs";
  return k;
}

InteractionKernel InteractionKernel::gaussian(double alpha) {
  if (!(alpha > 0.0)) throw InputError("gaussian kernel: alpha must be > 0");
  InteractionKernel k;
  k.kind_ = Kind::gaussian;
  k.alpha_ = alpha;
  k.fourier_nonneg_ = true;
  std::ostringstream os;
  os << "gaussian:" << alpha;
  k.name_ = os.str();
  return k;
}

InteractionKernel InteractionKernel::custom(std::function<double(double)> w, bool fourier_nonneg) {
  InteractionKernel k;
  k.kind_ = Kind::custom;
  k.fn_ = std::move(w);
  k.fourier_nonneg_ = fourier_nonneg;
  k.name_ = "custom";
  return k;
}

double InteractionKernel::operator()(double r) const {
  switch (kind_) {
    case Kind::riesz: return std::pow(r, -s_);
    case Kind::neg_abs: return -r;
    case Kind::gaussian: return std::exp(-alpha_ * r * r);
    case Kind::custom: return fn_(r);
  }
  return 0.0;
}

double InteractionKernel::at_zero() const {
  switch (kind_) {
    case Kind::riesz: throw InputError("w(0) diverges for riesz kernels");
    case Kind::neg_abs: return 0.0;
    case Kind::gaussian: return 1.0;
    case Kind::custom: return fn_(0.0);
  }
  return 0.0;
}

bool InteractionKernel::integrable_self(int d) const {
  if (kind_ == Kind::riesz) return s_ < double(d);
  return true;
}

InteractionKernel parse_kernel(const std::string& text) {
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "riesz") {
    if (arg.empty()) throw InputError("kernel 'riesz' needs an exponent, e.g. riesz:0.5");
    return InteractionKernel::riesz(std::stod(arg));
  }
  if (head == "coulomb3d") return InteractionKernel::coulomb3d();
  if (head == "negabs" || head == "neg_abs") return InteractionKernel::neg_abs();
  if (head == "gaussian") return InteractionKernel::gaussian(arg.empty() ? 1.0 : std::stod(arg));
  throw InputError("unknown kernel '" + text + "'");
}

namespace {

double gaussian_axis_mean(double alpha, double h) {
  // mean of exp(-alpha (x-y)^2) over a pair of identical segments of length h
  double sa = std::sqrt(alpha);
  double t1 = h * std::sqrt(M_PI) / (2.0 * sa) * std::erf(sa * h);
  double t2 = (1.0 - std::exp(-alpha * h * h)) / (2.0 * alpha);
  return 2.0 / (h * h) * (t1 - t2);
}

} // namespace

double cell_self_average(const InteractionKernel& kernel, const std::vector<double>& h) {
  const int d = static_cast<int>(h.size());
  switch (kernel.kind()) {
    case InteractionKernel::Kind::riesz: {
      double s = kernel.exponent();
      if (s >= double(d)) return std::numeric_limits<double>::infinity();
      if (d == 1) return 2.0 * std::pow(h[0], -s) / ((1.0 - s) * (2.0 - s));
      return cell_pair_integral(CellGeometry::box(h), {0, 0, 0}, kernel, 24);
    }
    case InteractionKernel::Kind::neg_abs:
      if (d != 1) throw InputError("neg_abs kernel is d=1 only");
      return -h[0] / 3.0;
    case InteractionKernel::Kind::gaussian: {
      double m = 1.0;
      for (double ha : h) m *= gaussian_axis_mean(kernel.alpha(), ha);
      return m;
    }
    case InteractionKernel::Kind::custom:
      return cell_pair_integral(CellGeometry::box(h), {0, 0, 0}, kernel, 24);
  }
  return 0.0;
}

Matrix kernel_matrix(const Grid& grid, const InteractionKernel& kernel,
                     bool allow_nonintegrable_diagonal) {
  const int d = grid.dim();
  if (kernel.kind() == InteractionKernel::Kind::neg_abs && d != 1)
    throw InputError("neg_abs kernel is d=1 only");
  if (!kernel.integrable_self(d) && !allow_nonintegrable_diagonal)
    throw InputError("kernel_matrix: riesz s >= d has no finite cell self-average; "
                     "classical solvers reject it");
  std::vector<double> h(d);
  for (int a = 0; a < d; ++a) h[a] = grid.spacing(a);
  const double diag = kernel.integrable_self(d) ? cell_self_average(kernel, h)
                                                : std::numeric_limits<double>::infinity();
  const std::size_t n = grid.size();
  Matrix c(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    c(i, i) = diag;
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = kernel(grid.distance(i, j));
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

} // namespace dfl
