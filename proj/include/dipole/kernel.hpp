#pragma once

// Periodized dipole interaction W_ij(x) on the box and its lattice Fourier
// transform.

#include <filesystem>
#include <span>
#include <vector>

#include "dipole/lattice.hpp"
#include "dipole/linalg.hpp"
#include "dipole/parallel.hpp"

namespace dipole {

struct KernelBuildOptions {
  // Absolute bound on the neglected image tail, per matrix entry.
  double tol = 1e-12;
  int threads = default_thread_count();
  // Upper limit on the image-cube radius, in units of L.
  int max_radius_in_L = 400;
  // Lower limit on the image-cube radius (0: chosen from tol alone).
  int min_cutoff = 0;
};

class KernelTable {
 public:
  const LatticeSpec& spec() const noexcept { return spec_; }
  int dim() const noexcept { return spec_.dim(); }
  // Images z = x + 2Ln with |z|_inf <= image_cutoff are summed exactly.
  int image_cutoff() const noexcept { return image_cutoff_; }
  double truncation_error_bound() const noexcept { return truncation_bound_; }

  double entry(std::size_t site, int i, int j) const noexcept {
    const std::size_t d = static_cast<std::size_t>(spec_.dim());
    return data_[site * d * d + static_cast<std::size_t>(i) * d + static_cast<std::size_t>(j)];
  }
  SmallMatrix at(std::size_t site) const;
  SmallMatrix at(const Site& x) const { return at(x.index(spec_)); }
  // Site-major, then row-major d x d.
  std::span<const double> data() const noexcept { return data_; }

  KernelTable(LatticeSpec spec, int image_cutoff, double truncation_bound, std::vector<double> data);

 private:
  LatticeSpec spec_;
  int image_cutoff_;
  double truncation_bound_;
  std::vector<double> data_;
};

// Rigorous bound on the per-entry contribution of all images outside the
// cube |z|_inf <= radius, uniform over sites in the box.
double image_tail_bound(const LatticeSpec& spec, int radius);

// Sums -d_i d_j Y over periodic images, growing the image cube until the tail
// bound is below options.tol. W(0) omits the self image. Entries are exactly
// parity and cubic-symmetry covariant.
KernelTable build_kernel(const LatticeSpec& spec, const KernelBuildOptions& options = {});

// Binary cache: "DIPW1", int32 d, int32 L, float64 epsilon, int32 cutoff,
// float64 entries (site-major, row-major), uint32 CRC-32 trailer; all
// little-endian.
void save_kernel(const KernelTable& table, const std::filesystem::path& path);
KernelTable load_kernel(const std::filesystem::path& path);

class FourierKernel {
 public:
  const LatticeSpec& spec() const noexcept { return spec_; }
  int dim() const noexcept { return spec_.dim(); }

  // \hat W(p) = sum_x e^{ipx} W(x).
  SmallMatrix at(const Momentum& p) const { return at(p.index(spec_)); }
  SmallMatrix at(std::size_t momentum) const;
  // \hat W(p) - e0 * identity.
  SmallMatrix shifted(const Momentum& p) const { return shifted(p.index(spec_)); }
  SmallMatrix shifted(std::size_t momentum) const;

  // Staggered real-space sum sum_x (-1)^{x+x_0} W_00(x).
  double e0() const noexcept { return e0_; }
  // \hat W_00 at the special momentum of axis 0.
  double e0_fourier() const noexcept { return e0_fourier_; }
  double max_imag_residual() const noexcept { return max_imag_; }
  std::span<const double> data() const noexcept { return data_; }

  FourierKernel(LatticeSpec spec, std::vector<double> data, double e0, double e0_fourier, double max_imag);

 private:
  LatticeSpec spec_;
  std::vector<double> data_;
  double e0_;
  double e0_fourier_;
  double max_imag_;
};

// Fast transform of every component; imaginary residuals above
// imag_tol * max|entry| and an e0 disagreement above e0_rel_tol are errors.
FourierKernel fourier_kernel(const KernelTable& table, double imag_tol = 1e-10, double e0_rel_tol = 1e-8);

// Direct O(|box|) evaluation of sum_x e^{ipx} W(x) at one momentum; returns
// the real part and stores the largest imaginary residual.
SmallMatrix direct_fourier_entry(const KernelTable& table, const Momentum& p, double* max_imag = nullptr);

}  // namespace dipole
