#pragma once

#include <complex>
#include <span>

namespace dipole::detail {

// d-dimensional complex transform on a cubic grid of side n, row-major.
// Plans are created under a global lock; execution is thread-safe.
class FftPlan {
 public:
  FftPlan(int dim, int n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  // out[m] = sum_u e^{+2 pi i m.u / n} in[u]
  void backward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const;
  // out[m] = sum_u e^{-2 pi i m.u / n} in[u]
  void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const;

  std::size_t size() const noexcept { return size_; }

 private:
  void* backward_ = nullptr;
  void* forward_ = nullptr;
  std::size_t size_ = 0;
};

}  // namespace dipole::detail
