#pragma once

// Spin configurations, reflections through lattice planes, Hamiltonian
// evaluation in both gauges, staggered ground states and the reflection
// positivity checks.

#include <random>
#include <span>
#include <vector>

#include "dipole/kernel.hpp"

namespace dipole {

enum class Gauge { original, staggered };

class SpinConfig {
 public:
  // Site-major spins, d components each; every spin must have unit norm
  // within 1e-12.
  SpinConfig(LatticeSpec spec, Gauge gauge, std::vector<double> spins);
  static SpinConfig uniform(const LatticeSpec& spec, Gauge gauge, std::span<const double> v);
  static SpinConfig random(const LatticeSpec& spec, Gauge gauge, std::mt19937_64& rng);

  const LatticeSpec& spec() const noexcept { return spec_; }
  Gauge gauge() const noexcept { return gauge_; }
  int dim() const noexcept { return spec_.dim(); }
  std::span<const double> data() const noexcept { return spins_; }
  std::span<const double> spin(std::size_t site) const noexcept {
    return {spins_.data() + site * static_cast<std::size_t>(spec_.dim()), static_cast<std::size_t>(spec_.dim())};
  }

  // Gauge changes through the staggering signs; both are involutive.
  SpinConfig to_original() const;
  SpinConfig to_staggered() const;

 private:
  LatticeSpec spec_;
  Gauge gauge_;
  std::vector<double> spins_;
};

// Pair of planes perpendicular to `axis` through offset + 1/2 and
// offset + 1/2 + period/2 (period 0 means the full side 2L). The reflection
// maps x_axis to 2 offset + 1 - x_axis modulo the period; reduced periods
// are meaningful for configurations that are themselves periodic with that
// period.
struct ReflectionPlane {
  int axis = 0;
  int offset = 0;
  int period = 0;
};

// Site index of the reflected site.
std::size_t reflect_site(const LatticeSpec& spec, const ReflectionPlane& plane, std::size_t site);
// True for sites on the positive side: (x_axis - offset - 1) mod period < period/2.
bool in_positive_half(const LatticeSpec& spec, const ReflectionPlane& plane, std::size_t site);
// All planes with the full period: d axes times offsets 0..L-1.
std::vector<ReflectionPlane> all_planes(const LatticeSpec& spec);

// Site map plus component map: every component except `axis` changes sign
// (original gauge). In the staggered gauge only the site map is applied.
SpinConfig reflect(const SpinConfig& config, const ReflectionPlane& plane);

// H = sum_{x,y} S_x . W(x - y) S_y including x = y through W(0). Staggered
// input is converted first.
double energy(const SpinConfig& config, const KernelTable& table);
// Same sum through the fast transform of the spins.
double energy_fft(const SpinConfig& config, const FourierKernel& fk);
// Staggered-gauge form: -1/2 sum (s_x - s_y) W'(x,y) (s_x - s_y) + e0 |box|.
double energy_primed(const SpinConfig& config, const KernelTable& table, double e0);

// max over x, i, j of |sum_y W'_ij(x, y) - e0 delta_ij|.
double primed_row_sum_deviation(const KernelTable& table, double e0);

// Spin at x has components (-1)^(x + x_i) (-1)^(x0 + x0_i) v^i.
SpinConfig ground_state(const LatticeSpec& spec, std::span<const double> v, const Site& x0);

// Symmetric matrix on (positive-half site, component) pairs whose quadratic
// form is minus the coupling between a field on the positive half and its
// reflection. Rows are ordered by the positive-half sites in storage order.
struct CrossOperator {
  std::vector<std::size_t> sites;
  int dim = 0;
  std::vector<double> matrix;
  double max_asymmetry = 0.0;
};
CrossOperator cross_operator(const KernelTable& table, const ReflectionPlane& plane);
// rho: one d-vector per positive-half site, in `sites` order.
double rp_cross_form(const KernelTable& table, const ReflectionPlane& plane, std::span<const double> rho);

struct ChessboardEnergies {
  double original = 0.0;
  // Positive half kept, negative half replaced by its reflection.
  double positive = 0.0;
  double negative = 0.0;
  SpinConfig positive_config;
  SpinConfig negative_config;
};
ChessboardEnergies chessboard_step(const SpinConfig& config, const ReflectionPlane& plane, const KernelTable& table);

// Greedy reflection descent: per axis, planes (2L, 0), (2L, L/2), (L, L/4),
// ... keeping the lower-energy half each time. Returns the energy after each
// step, starting with the input energy.
std::vector<double> chessboard_descent(const SpinConfig& config, const KernelTable& table);

}  // namespace dipole
