#pragma once

#include <array>
#include <span>
#include <vector>

#include "dipole/lattice.hpp"

namespace dipole {

// Dense d x d matrix for d <= kMaxDim, row-major, value semantics.
class SmallMatrix {
 public:
  SmallMatrix() = default;
  explicit SmallMatrix(int n) : n_(n) {}
  static SmallMatrix identity(int n);

  int size() const noexcept { return n_; }
  double& operator()(int i, int j) noexcept { return a_[i * kMaxDim + j]; }
  double operator()(int i, int j) const noexcept { return a_[i * kMaxDim + j]; }

  SmallMatrix& operator+=(const SmallMatrix& o) noexcept;
  SmallMatrix& operator-=(const SmallMatrix& o) noexcept;
  SmallMatrix& operator*=(double s) noexcept;

  double max_abs() const noexcept;
  double max_asymmetry() const noexcept;
  void symmetrize() noexcept;

 private:
  int n_ = 0;
  std::array<double, kMaxDim * kMaxDim> a_{};
};

SmallMatrix operator+(SmallMatrix a, const SmallMatrix& b) noexcept;
SmallMatrix operator-(SmallMatrix a, const SmallMatrix& b) noexcept;

// Eigen-decomposition of a real symmetric matrix. Eigenvalues ascending;
// eigenvector k is column k of `vectors` (row-major n x n).
struct SymmetricEigen {
  int n = 0;
  std::vector<double> values;
  std::vector<double> vectors;
  int sweeps = 0;

  double vector(int row, int k) const { return vectors[static_cast<std::size_t>(row) * n + k]; }
};

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
// off_tol times the full Frobenius norm.
SymmetricEigen jacobi_eigen(std::span<const double> a, int n, double off_tol = 1e-13);
SymmetricEigen jacobi_eigen(const SmallMatrix& a, double off_tol = 1e-13);

// Eigenvalues (ascending) of a large dense symmetric matrix by Householder
// tridiagonalization and implicit QR.
std::vector<double> symmetric_eigenvalues(std::span<const double> a, int n);

}  // namespace dipole
