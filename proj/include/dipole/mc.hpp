#pragma once

// Metropolis sampling of the Gibbs measure with local-field bookkeeping, and
// the statistical checks built on it.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "dipole/bounds.hpp"
#include "dipole/kernel.hpp"
#include "dipole/report.hpp"
#include "dipole/rp.hpp"

namespace dipole {

enum class StartKind { random, ordered };

struct MCParams {
  double beta = 1.0;
  // Total sweeps per chain, including burn-in.
  long sweeps = 1000;
  long burn_in = 100;
  int chains = 1;
  std::uint64_t seed = 1;
  // Initial cone half-angle (radians); adapted toward the target acceptance
  // during burn-in only.
  double half_angle = 1.0;
  double target_acceptance = 0.5;
  // Full recomputation of the local field every this many sweeps.
  int audit_interval = 100;
  StartKind start = StartKind::random;
  int threads = default_thread_count();
};

void validate(const MCParams& p);

// Single-spin Metropolis chain in the original gauge. The local field
// F_x = sum_y W(x - y) S_y (including W(0)) is updated after every accepted
// move.
class MetropolisChain {
 public:
  MetropolisChain(const KernelTable& table, double beta, double half_angle, std::mt19937_64 rng,
                  const SpinConfig& initial);

  // One proposal at site x; returns true if accepted.
  bool update(std::size_t x);
  // One proposal per site in storage order.
  void sweep();

  double energy() const noexcept { return energy_; }
  // Recomputes field and energy from scratch; returns |incremental - full|.
  double audit();

  double half_angle() const noexcept { return half_angle_; }
  void set_half_angle(double a) noexcept { half_angle_ = a; }
  long accepted() const noexcept { return accepted_; }
  long proposed() const noexcept { return proposed_; }
  void reset_counters() noexcept { accepted_ = proposed_ = 0; }

  std::span<const double> spins() const noexcept { return spins_; }
  std::span<const double> field() const noexcept { return field_; }
  const KernelTable& table() const noexcept { return table_; }

 private:
  void propose(std::size_t x, double* out);
  void add_field(std::size_t x, const double* delta);

  const KernelTable& table_;
  const LatticeSpec spec_;
  const int d_;
  double beta_;
  double half_angle_;
  std::mt19937_64 rng_;
  std::vector<double> spins_;
  std::vector<double> field_;
  std::vector<int> residues_;
  double energy_ = 0.0;
  long accepted_ = 0;
  long proposed_ = 0;
};

// Plane-wave probe h_x = e^{ipx} v for the Gaussian-domination check.
struct Probe {
  Momentum p;
  std::vector<std::complex<double>> v;
};

struct ChainSeries {
  // Per measurement.
  std::vector<double> energy;
  // Staggered magnetization M = sum_x sigma_x, d per measurement.
  std::vector<double> magnetization;
  // (1/|box|) sum_x (S^l_x)^2, d per measurement.
  std::vector<double> component_weight;
  // |B(h)|^2 per probe per measurement.
  std::vector<double> probe_values;
  // Bin means of |S^l_p|^2, layout [bin][momentum][l].
  int bin_size = 1;
  std::vector<double> q_bins;
  // Mean of Re S^i_p conj(S^j_p), layout [momentum][i][j].
  std::vector<double> q_mean;
  double acceptance = 0.0;
  double half_angle = 0.0;
  double max_drift = 0.0;
  double max_parseval_error = 0.0;
  double max_order_identity_error = 0.0;
};

struct Estimate {
  double mean = 0.0;
  double sigma = 0.0;
  // Integrated autocorrelation time in measurement units (0 when unknown).
  double tau = 0.0;
};

// Mean and standard error by blocking: block sizes double while at least
// min_blocks blocks remain; the largest error over those levels is used.
Estimate blocking_estimate(std::span<const double> series, int min_blocks = 32);
// Independent chains combined: mean of means, errors added in quadrature.
Estimate combine_chains(const std::vector<Estimate>& per_chain);

class ObservableSeries {
 public:
  ObservableSeries(LatticeSpec spec, MCParams params, std::vector<Probe> probes, std::vector<ChainSeries> chains);

  const LatticeSpec& spec() const noexcept { return spec_; }
  const MCParams& params() const noexcept { return params_; }
  const std::vector<ChainSeries>& chains() const noexcept { return chains_; }
  const std::vector<Probe>& probes() const noexcept { return probes_; }
  long measurements_per_chain() const noexcept;

  Estimate energy() const;
  // <|M|^2>/|box|^2.
  Estimate order_parameter() const;
  // <(M^l)^2>/|box|^2.
  Estimate order_component(int l) const;
  // Q_ll(p) = <|S^l_p|^2>.
  Estimate structure_factor(std::size_t momentum, int l) const;
  // (1/|box|) sum_p Q_ll(p), per configuration equal to (1/|box|) sum_x (S^l_x)^2.
  Estimate sum_rule(int l) const;
  Estimate probe(std::size_t k) const;
  double acceptance() const;
  double max_drift() const;
  double max_parseval_error() const;
  double max_order_identity_error() const;

 private:
  LatticeSpec spec_;
  MCParams params_;
  std::vector<Probe> probes_;
  std::vector<ChainSeries> chains_;
};

// Runs params.chains independent chains, chain c on stream c of params.seed.
// Throws ErrorCode::numerical if an audit finds incremental and recomputed
// energies differing by more than 1e-6 |e0| |box|.
ObservableSeries sample(const KernelTable& table, double e0, const MCParams& params,
                        const std::vector<Probe>& probes = {});

// Q_ll(p) <= bound + 3 sigma at every momentum and component with a bound;
// sum rule within 3 sigma of 1/d.
Report ir_check(const ObservableSeries& series, const IRBoundTable& ir);

// Exact right side -sum (h_x - h_y)^* W'(x,y) (h_x - h_y), by a real-space
// double sum and by the Fourier formula 2 |box| sum_i |v_i|^2 W0_ii(p + pi_i).
// The sampled left side uses B(h) = 2 sum_x h_x . (F'_x - e0 sigma_x) with
// F' the staggered local field; this is the linear term of the Gibbs weight
// under sigma -> sigma - h and stays exact when W'(x,y) is not a symmetric
// d x d matrix.
double gd_rhs_real_space(const KernelTable& table, const Probe& h, double e0);
double gd_rhs_fourier(const FourierKernel& fk, const Probe& h);

// Checks for the probes recorded in `series` (right side two ways, and the
// sampled left side against it).
Report gaussian_domination_report(const ObservableSeries& series, const KernelTable& table, const FourierKernel& fk);

// Samples with the given probes and returns gaussian_domination_report.
Report gaussian_domination_check(const KernelTable& table, const FourierKernel& fk, const MCParams& params,
                                 const std::vector<Probe>& probes);

// Single-site stationarity: all spins but one frozen, the free spin updated
// repeatedly; its first and second moments are compared with quadrature of
// the exact conditional density. d = 3 only.
Report detailed_balance_check(const KernelTable& table, double beta, std::uint64_t seed, long steps,
                              std::size_t site = 0);

// One row per measurement: chain, index, energy, magnetization, component weights.
void write_series_csv(const ObservableSeries& series, const std::filesystem::path& path);

}  // namespace dipole
