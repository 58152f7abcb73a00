#pragma once

#include <cstddef>
#include <vector>

namespace dfl {

// Dense row-major matrix, just enough for the solvers in this project.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  static Matrix identity(std::size_t n);

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);
double dot(const std::vector<double>& a, const std::vector<double>& b);
double quad_form(const Matrix& a, const std::vector<double>& x); // x^T A x
double trace_prod(const Matrix& a, const Matrix& b);             // Tr(A B), both symmetric

struct EigenSystem {
  std::vector<double> values; // ascending
  Matrix vectors;             // column j is the eigenvector of values[j]
};

// Householder tridiagonalization + implicit-shift QL with eigenvector
// accumulation. Deterministic; good to ~1e-14 relative on the sizes used
// here (n <= ~1000).
EigenSystem symmetric_eigen(const Matrix& a);

} // namespace dfl
