#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dipole/error.hpp"
#include "dipole/mc.hpp"
#include "dipole/random.hpp"

using namespace dipole;

namespace {

struct Fixture {
  KernelTable table;
  FourierKernel fk;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    KernelTable t = build_kernel(LatticeSpec::with_auto_epsilon(3, 2));
    FourierKernel fk = fourier_kernel(t);
    return Fixture{std::move(t), std::move(fk)};
  }();
  return f;
}

MCParams quick(double beta, long sweeps, int chains = 2) {
  MCParams p;
  p.beta = beta;
  p.sweeps = sweeps;
  p.burn_in = sweeps / 10;
  p.chains = chains;
  p.seed = 42;
  p.threads = 2;
  return p;
}

}  // namespace

TEST_CASE("parameter validation lists every problem") {
  MCParams p;
  p.beta = -1.0;
  p.sweeps = 10;
  p.burn_in = 20;
  p.chains = 0;
  try {
    validate(p);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("beta") != std::string::npos);
    CHECK(what.find("sweeps") != std::string::npos);
    CHECK(what.find("chains") != std::string::npos);
  }
}

TEST_CASE("blocking estimate") {
  std::vector<double> iid;
  auto g = make_engine(1, 0);
  for (int k = 0; k < 4096; ++k) iid.push_back(standard_normal(g));
  const Estimate e = blocking_estimate(iid);
  CHECK(std::abs(e.mean) < 4.0 * e.sigma);
  CHECK(e.sigma == doctest::Approx(1.0 / 64.0).epsilon(0.3));
  // Strongly correlated series: blocks of 64 identical values.
  std::vector<double> corr;
  for (int k = 0; k < 4096; ++k) corr.push_back(iid[k / 64]);
  const Estimate c = blocking_estimate(corr);
  CHECK(c.tau > 10.0);
}

TEST_CASE("incremental field matches recomputation") {
  const auto& f = fixture();
  auto rng = make_engine(9, 0);
  const SpinConfig c = SpinConfig::random(f.table.spec(), Gauge::original, rng);
  MetropolisChain chain(f.table, 2.0, 1.0, make_engine(9, 1), c);
  for (int s = 0; s < 20; ++s) chain.sweep();
  const double e = chain.energy();
  const std::vector<double> field(chain.field().begin(), chain.field().end());
  CHECK(chain.audit() < 1e-10);
  for (std::size_t k = 0; k < field.size(); ++k) CHECK(std::abs(field[k] - chain.field()[k]) < 1e-12);
  const SpinConfig now(f.table.spec(), Gauge::original, std::vector<double>(chain.spins().begin(), chain.spins().end()));
  CHECK(std::abs(energy(now, f.table) - e) < 1e-10);
}

TEST_CASE("beta = 0: every move accepted, disordered order parameter") {
  const auto& f = fixture();
  const ObservableSeries s = sample(f.table, f.fk.e0(), quick(0.0, 2000, 2));
  CHECK(s.acceptance() == 1.0);
  const Estimate m = s.order_parameter();
  const double target = 1.0 / static_cast<double>(f.table.spec().volume());
  CHECK(std::abs(m.mean - target) <= 3.0 * m.sigma);
}

TEST_CASE("per-configuration identities") {
  const auto& f = fixture();
  const ObservableSeries s = sample(f.table, f.fk.e0(), quick(3.0, 300, 1));
  CHECK(s.max_parseval_error() < 1e-10);
  CHECK(s.max_order_identity_error() < 1e-12);
  CHECK(s.max_drift() < 1e-6 * std::abs(f.fk.e0()) * f.table.spec().volume());
}

TEST_CASE("infrared bound and sum rule at beta = 5") {
  const auto& f = fixture();
  const ConstantsRecord c = constants(f.table, f.fk);
  const ObservableSeries s = sample(f.table, f.fk.e0(), quick(5.0, 4000, 2));
  const Report r = ir_check(s, ir_bound(f.fk, c, 5.0));
  for (const auto& check : r.checks()) INFO(check.name << ": " << check.detail);
  CHECK(r.count(Verdict::fail) == 0);
}

TEST_CASE("sampling is reproducible and independent of the thread count") {
  const auto& f = fixture();
  MCParams p = quick(2.0, 200, 3);
  const ObservableSeries a = sample(f.table, f.fk.e0(), p);
  p.threads = 1;
  const ObservableSeries b = sample(f.table, f.fk.e0(), p);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(a.chains()[c].energy == b.chains()[c].energy);
    CHECK(a.chains()[c].q_bins == b.chains()[c].q_bins);
  }
  p.seed = 43;
  const ObservableSeries d = sample(f.table, f.fk.e0(), p);
  CHECK(a.chains()[0].energy != d.chains()[0].energy);
}

TEST_CASE("Gaussian domination") {
  const auto& f = fixture();
  const LatticeSpec& s = f.table.spec();
  std::vector<Probe> probes;
  probes.push_back({Momentum(s, {0, 0, 0}), {0.6, 0.0, 0.8}});
  probes.push_back({Momentum(s, {1, 1, 1}), {1.0, std::complex<double>(0.0, 0.5), 0.3}});
  probes.push_back({Momentum(s, {1, 0, 3}), {0.2, 0.7, -0.4}});
  for (const auto& h : probes)
    CHECK(std::abs(gd_rhs_real_space(f.table, h, f.fk.e0()) - gd_rhs_fourier(f.fk, h)) <=
          1e-10 * std::abs(f.fk.e0()) * s.volume());
  const Report r = gaussian_domination_check(f.table, f.fk, quick(1.0, 2000, 2), probes);
  for (const auto& check : r.checks()) INFO(check.name << ": " << check.detail);
  CHECK(r.count(Verdict::fail) == 0);
}

TEST_CASE("single-site stationarity") {
  const auto& f = fixture();
  const Report r = detailed_balance_check(f.table, 1.0, 17, 200000);
  for (const auto& check : r.checks()) INFO(check.name << ": " << check.detail);
  CHECK(r.count(Verdict::fail) == 0);
}

TEST_CASE("series csv has one row per measurement") {
  const auto& f = fixture();
  const ObservableSeries s = sample(f.table, f.fk.e0(), quick(1.0, 50, 2));
  const auto path = std::filesystem::temp_directory_path() / "dipole_series_test.csv";
  write_series_csv(s, path);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  CHECK(line.rfind("chain,measurement,energy", 0) == 0);
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2 * (50 - 5));
  std::filesystem::remove(path);
}
