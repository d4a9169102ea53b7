#pragma once

// Spectrum of the shifted Fourier kernel, the constants e0, e1, alpha, gamma,
// and the quadratic lower bound Y(p).

#include <filesystem>
#include <string>
#include <vector>

#include "dipole/kernel.hpp"
#include "dipole/report.hpp"
#include "dipole/yukawa.hpp"

namespace dipole {

struct SeriesValue {
  double value = 0.0;
  // Rigorous bound on the omitted tail.
  double tail_bound = 0.0;
  int shells = 0;
};

// Transverse mode sum for alpha: sum over m in Z^{d-1} of
// w q (1+q)^2 / (1-q^4), q = e^{-w}, w = sqrt(pi^2 |2m+1|^2 + eps^2),
// which is the x_1 sum closed in geometric form. Modes with |m|_inf <= shells.
SeriesValue alpha_series(const YukawaParams& params, int shells);
// Transverse mode sum for gamma: k has component 2 pi m_1 along the second
// axis and pi(2 m_j + 1) along the others; terms (k_2^2/w) q (1-q)^2/(1-q^4).
SeriesValue gamma_series(const YukawaParams& params, int shells);

struct ConstantEstimate {
  double value = 0.0;
  double error = 0.0;
  std::string method;
};

struct ConstantsRecord {
  ConstantEstimate e0;
  ConstantEstimate e0_fourier;
  ConstantEstimate e1;
  ConstantEstimate e1_fourier;
  ConstantEstimate alpha;
  ConstantEstimate alpha_series;
  ConstantEstimate gamma;
  ConstantEstimate gamma_series;
  int dim = 3;
  double epsilon = 0.0;
  // max_p of the operator norm of W0(p).
  double scale = 0.0;
};

struct ConstantsOptions {
  double alpha_rel_tol = 1e-6;
  double gamma_rel_tol = 1e-6;
  double e_rel_tol = 1e-8;
  int series_shells = 12;
};

// Real-space staggered sums and Fourier entries for e0, e1; real-space
// weighted sums and transverse mode sums for alpha and gamma. Any
// disagreement beyond options, or non-positive alpha/gamma, throws
// ErrorCode::numerical naming both values.
ConstantsRecord constants(const KernelTable& table, const FourierKernel& fk, const ConstantsOptions& options = {});

// Y(p): diagonal with entries (1/d)(alpha sin^2(p_i/2) + gamma sum_{l!=i} cos^2(p_l/2)).
SmallMatrix bound_matrix(const LatticeSpec& spec, const Momentum& p, double alpha, double gamma);

// max_p ||W0(p)||.
double spectral_scale(const FourierKernel& fk);

struct MomentumSpectrum {
  std::vector<double> eigenvalues;
  // Column-major eigenvectors, column k for eigenvalue k.
  std::vector<double> eigenvectors;
  double bound_margin = 0.0;
};

struct SpectrumTable {
  LatticeSpec spec;
  std::vector<MomentumSpectrum> entries;
  double scale = 0.0;
  double min_eigenvalue = 0.0;
  std::size_t min_momentum = 0;
  std::vector<std::size_t> zero_set;
  double max_orthonormality_error = 0.0;
};

// Eigen-decomposes W0(p) at every grid momentum. Momenta with an eigenvalue
// within zero_tol * scale of zero form the zero set. When alpha and gamma
// are given (> 0) the margin lambda_min(W0(p) - Y(p)) is also stored.
SpectrumTable psd_sweep(const FourierKernel& fk, double zero_tol = 1e-6, double alpha = 0.0, double gamma = 0.0,
                        int threads = default_thread_count());

struct CurvatureFit {
  int axis = 0;
  // Intercept of lambda/t^2 against t^2 along the axis through pi_axis.
  double curvature = 0.0;
  double expected = 0.0;
  int points = 0;
};

CurvatureFit curvature_fit(const FourierKernel& fk, int axis, double alpha);

// Verdicts: non-negativity, zero set, axis eigenvectors, Y(p) bound, the
// W0(pi_m) structure, e1 - e0 >= (alpha + gamma)/d and curvature.
Report spectral_checks(const FourierKernel& fk, const SpectrumTable& table, const ConstantsRecord& c,
                       double negative_tol = 1e-8, double bound_tol = 1e-8, double curvature_slack = 0.05);

void write_spectrum_csv(const SpectrumTable& table, const std::filesystem::path& path);

}  // namespace dipole
