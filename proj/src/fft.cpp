#include "fft.hpp"

#include <fftw3.h>

#include <array>
#include <mutex>
#include <vector>

#include "dipole/error.hpp"

namespace dipole::detail {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FftPlan::FftPlan(int dim, int n) {
  std::array<int, 8> dims{};
  size_ = 1;
  for (int k = 0; k < dim; ++k) {
    dims[k] = n;
    size_ *= static_cast<std::size_t>(n);
  }
  std::vector<std::complex<double>> a(size_), b(size_);
  auto* in = reinterpret_cast<fftw_complex*>(a.data());
  auto* out = reinterpret_cast<fftw_complex*>(b.data());
  std::lock_guard lock(planner_mutex());
  backward_ = fftw_plan_dft(dim, dims.data(), in, out, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  forward_ = fftw_plan_dft(dim, dims.data(), in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!backward_ || !forward_) fail(ErrorCode::internal, "FFTW planner failed");
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  if (backward_) fftw_destroy_plan(static_cast<fftw_plan>(backward_));
  if (forward_) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
}

void FftPlan::backward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const {
  if (in.size() != size_ || out.size() != size_) fail(ErrorCode::internal, "FFT size mismatch");
  // FFTW does not modify the input of an out-of-place complex transform.
  fftw_execute_dft(static_cast<fftw_plan>(backward_),
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

void FftPlan::forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const {
  if (in.size() != size_ || out.size() != size_) fail(ErrorCode::internal, "FFT size mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(forward_),
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace dipole::detail
