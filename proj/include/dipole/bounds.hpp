#pragma once

// Infrared-bound right-hand sides and the long-range-order lower bounds.

#include <filesystem>
#include <limits>
#include <vector>

#include "dipole/kernel.hpp"
#include "dipole/report.hpp"
#include "dipole/spectral.hpp"

namespace dipole {

struct IRBoundEntry {
  // Zero-set axis of this momentum, or -1.
  int special_axis = -1;
  // (2 beta)^{-1} W0(p)^{-1}; unset at zero-set momenta.
  SmallMatrix inverse;
  // Per component: bound from the quadratic lower bound Y(p), i.e.
  // (d / 2 beta) / D_l(p) with D_l(p) = alpha sin^2(p_l/2) + gamma sum_{j!=l} cos^2(p_j/2).
  // Infinite where D_l vanishes.
  std::array<double, kMaxDim> quadratic{};
  // Per component: the operative bound, the diagonal of `inverse` off the
  // zero set and d/(2 beta (alpha + gamma)) at pi_m for components l != m.
  std::array<double, kMaxDim> diagonal{};
  // At pi_m, l != m: the sharper 1/(2 beta (e1 - e0)).
  double gap_bound = std::numeric_limits<double>::infinity();
};

struct IRBoundTable {
  LatticeSpec spec;
  double beta = 0.0;
  std::vector<IRBoundEntry> entries;
};

// Throws ErrorCode::numerical if W0(p) is singular off the zero set.
IRBoundTable ir_bound(const FourierKernel& fk, const ConstantsRecord& c, double beta);

// Checks diag[(2 beta)^{-1} W0^{-1}] <= quadratic-form bound at every
// off-zero momentum.
Check ir_consistency_check(const IRBoundTable& table, double rel_tol = 1e-10);

struct QuadratureResult {
  // Richardson-extrapolated integral of 1/D_l over the Brillouin zone,
  // normalized by (2 pi)^d.
  double value = 0.0;
  double error = 0.0;
  // Raw midpoint values on the successive grids and the extrapolants.
  std::vector<int> grids;
  std::vector<double> raw;
  std::vector<double> extrapolated;
};

// Midpoint rule on n^d grids shifted by half a step (no node on the zero
// set) for n = n0, 2 n0, ..., n_max, with Richardson extrapolation for the
// O(1/n) leading error. The error estimate is the change of the last two
// extrapolants.
QuadratureResult lro_integral(int dim, double alpha, double gamma, int n0 = 16, int n_max = 64,
                              int threads = default_thread_count());

// Per-component finite-box bound: 1/d - (d / 2 beta |box|) sum_{p != pi_l} 1/D_l(p).
double finite_volume_bound(const LatticeSpec& spec, double alpha, double gamma, double beta, int component = 0);

struct LROEstimate {
  double beta = 0.0;
  // Per component, comparable to <(M^l)^2>/|box|^2.
  double finite_volume = 0.0;
  // Infinite-volume c_d(beta) = 1 - (d^2 / 2 beta) * integral.
  double c_d = 0.0;
  double c_d_error = 0.0;
  double beta_d = 0.0;
  double beta_d_lo = 0.0;
  double beta_d_hi = 0.0;
};

// c_d as a function of beta for a given integral.
double c_d(int dim, double integral, double beta);
// Root of c_d bracketed by bisection at integral +- error.
LROEstimate lro_lower_bound(const LatticeSpec& spec, const ConstantsRecord& c, double beta,
                            const QuadratureResult& q);

// Smallest beta (by bisection) at which the per-component finite-box bound
// reaches `target`.
double beta_for_finite_bound(const LatticeSpec& spec, double alpha, double gamma, double target);

// beta, finite-box bound, c_d, c_d error.
void write_cd_curve_csv(const LatticeSpec& spec, const ConstantsRecord& c, const QuadratureResult& q,
                        const std::vector<double>& betas, const std::filesystem::path& path);

}  // namespace dipole
