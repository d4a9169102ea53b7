#include "dipole/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dipole/error.hpp"

namespace dipole {

SmallMatrix SmallMatrix::identity(int n) {
  SmallMatrix m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

SmallMatrix& SmallMatrix::operator+=(const SmallMatrix& o) noexcept {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) += o(i, j);
  return *this;
}

SmallMatrix& SmallMatrix::operator-=(const SmallMatrix& o) noexcept {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) -= o(i, j);
  return *this;
}

SmallMatrix& SmallMatrix::operator*=(double s) noexcept {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) *= s;
  return *this;
}

double SmallMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j)));
  return m;
}

double SmallMatrix::max_asymmetry() const noexcept {
  double m = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
  return m;
}

void SmallMatrix::symmetrize() noexcept {
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) {
      const double v = 0.5 * ((*this)(i, j) + (*this)(j, i));
      (*this)(i, j) = v;
      (*this)(j, i) = v;
    }
}

SmallMatrix operator+(SmallMatrix a, const SmallMatrix& b) noexcept { return a += b; }
SmallMatrix operator-(SmallMatrix a, const SmallMatrix& b) noexcept { return a -= b; }

SymmetricEigen jacobi_eigen(std::span<const double> input, int n, double off_tol) {
  if (n <= 0 || input.size() != static_cast<std::size_t>(n) * n)
    fail(ErrorCode::invalid_argument, "jacobi_eigen: matrix size mismatch");
  const std::size_t N = static_cast<std::size_t>(n);
  std::vector<double> a(input.begin(), input.end());
  // Work on the symmetric part.
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) {
      const double v = 0.5 * (a[i * N + j] + a[j * N + i]);
      a[i * N + j] = v;
      a[j * N + i] = v;
    }
  std::vector<double> v(N * N, 0.0);
  for (std::size_t i = 0; i < N; ++i) v[i * N + i] = 1.0;

  double total = 0.0;
  for (double x : a) total += x * x;
  const double target = off_tol * off_tol * total;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = i + 1; j < N; ++j) s += 2.0 * a[i * N + j] * a[i * N + j];
    return s;
  };

  int sweep = 0;
  constexpr int kMaxSweeps = 100;
  while (sweep < kMaxSweeps && off_norm() > target) {
    ++sweep;
    for (std::size_t p = 0; p + 1 < N; ++p) {
      for (std::size_t q = p + 1; q < N; ++q) {
        const double apq = a[p * N + q];
        if (apq == 0.0) continue;
        const double app = a[p * N + p];
        const double aqq = a[q * N + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < N; ++k) {
          const double akp = a[k * N + p];
          const double akq = a[k * N + q];
          a[k * N + p] = c * akp - s * akq;
          a[k * N + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < N; ++k) {
          const double apk = a[p * N + k];
          const double aqk = a[q * N + k];
          a[p * N + k] = c * apk - s * aqk;
          a[q * N + k] = s * apk + c * aqk;
        }
        a[p * N + q] = 0.0;
        a[q * N + p] = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
          const double vkp = v[k * N + p];
          const double vkq = v[k * N + q];
          v[k * N + p] = c * vkp - s * vkq;
          v[k * N + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off_norm() > target)
    fail(ErrorCode::numerical, "jacobi_eigen: no convergence after 100 sweeps");

  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * N + x] < a[y * N + y]; });

  SymmetricEigen out;
  out.n = n;
  out.sweeps = sweep;
  out.values.resize(N);
  out.vectors.resize(N * N);
  for (std::size_t k = 0; k < N; ++k) {
    out.values[k] = a[order[k] * N + order[k]];
    for (std::size_t r = 0; r < N; ++r) out.vectors[r * N + k] = v[r * N + order[k]];
  }
  return out;
}

SymmetricEigen jacobi_eigen(const SmallMatrix& m, double off_tol) {
  const int n = m.size();
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = m(i, j);
  return jacobi_eigen(a, n, off_tol);
}

std::vector<double> symmetric_eigenvalues(std::span<const double> a, int n) {
  if (n <= 0 || a.size() != static_cast<std::size_t>(n) * n)
    fail(ErrorCode::invalid_argument, "symmetric_eigenvalues: matrix size mismatch");
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(a.data(), n, n);
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorCode::numerical, "symmetric_eigenvalues: no convergence");
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + n);
}

}  // namespace dipole
