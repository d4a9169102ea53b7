#include <doctest.h>

#include <cmath>

#include "dipole/error.hpp"
#include "dipole/random.hpp"
#include "dipole/rp.hpp"

using namespace dipole;

namespace {

struct Fixture {
  KernelTable table;
  FourierKernel fk;
};

const Fixture& fixture(int L) {
  static const Fixture f2 = [] {
    KernelTable t = build_kernel(LatticeSpec::with_auto_epsilon(3, 2));
    FourierKernel fk = fourier_kernel(t);
    return Fixture{std::move(t), std::move(fk)};
  }();
  static const Fixture f4 = [] {
    KernelTable t = build_kernel(LatticeSpec::with_auto_epsilon(3, 4));
    FourierKernel fk = fourier_kernel(t);
    return Fixture{std::move(t), std::move(fk)};
  }();
  return L == 2 ? f2 : f4;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST_CASE("spin configuration validation") {
  const auto s = LatticeSpec::with_auto_epsilon(3, 2);
  std::vector<double> bad(s.volume() * 3, 0.0);
  CHECK_THROWS_AS(SpinConfig(s, Gauge::original, bad), Error);
  std::vector<double> wrong_size(5, 1.0);
  CHECK_THROWS_AS(SpinConfig(s, Gauge::original, wrong_size), Error);
}

TEST_CASE("gauge conversions are involutive") {
  const auto s = LatticeSpec::with_auto_epsilon(3, 2);
  auto rng = make_engine(3, 0);
  const SpinConfig c = SpinConfig::random(s, Gauge::original, rng);
  CHECK(max_diff(c.to_staggered().to_original().data(), c.data()) == 0.0);
}

TEST_CASE("reflections are involutions and swap the halves") {
  const auto s = LatticeSpec::with_auto_epsilon(3, 2);
  for (const auto& p : all_planes(s)) {
    std::size_t positive = 0;
    for (std::size_t x = 0; x < s.volume(); ++x) {
      const std::size_t rx = reflect_site(s, p, x);
      CHECK(reflect_site(s, p, rx) == x);
      CHECK(in_positive_half(s, p, x) != in_positive_half(s, p, rx));
      positive += in_positive_half(s, p, x);
    }
    CHECK(positive == s.volume() / 2);
  }
}

TEST_CASE("staggered ground states have energy e0 |box|") {
  for (int L : {2, 4}) {
    const auto& f = fixture(L);
    const LatticeSpec& s = f.table.spec();
    const double target = f.fk.e0() * static_cast<double>(s.volume());
    auto rng = make_engine(11, 0);
    for (int t = 0; t < 5; ++t) {
      std::vector<double> v(3);
      random_unit_vector(rng, v);
      const SpinConfig g = ground_state(s, v, Site(s, {t % 2, 0, 1}));
      CHECK(std::abs(energy(g, f.table) - target) <= 1e-10 * std::abs(target));
      CHECK(std::abs(energy_fft(g, f.fk) - target) <= 1e-10 * std::abs(target));
      // The staggered image is uniform.
      const SpinConfig st = g.to_staggered();
      for (std::size_t x = 1; x < s.volume(); ++x) CHECK(max_diff(st.spin(x), st.spin(0)) < 1e-15);
    }
  }
}

TEST_CASE("energies above the ground state and fft agreement") {
  const auto& f = fixture(4);
  const LatticeSpec& s = f.table.spec();
  const double e0n = f.fk.e0() * static_cast<double>(s.volume());
  auto rng = make_engine(5, 0);
  for (int t = 0; t < 5; ++t) {
    const SpinConfig c = SpinConfig::random(s, Gauge::original, rng);
    const double h = energy(c, f.table);
    CHECK(h >= e0n);
    CHECK(std::abs(h - energy_fft(c, f.fk)) <= 1e-10 * std::abs(e0n));
  }
}

TEST_CASE("gradient form matches on the 4^3 box") {
  const auto& f = fixture(2);
  const LatticeSpec& s = f.table.spec();
  const double e0 = f.fk.e0();
  CHECK(primed_row_sum_deviation(f.table, e0) <= std::max(1e-14, f.table.truncation_error_bound()));
  auto rng = make_engine(8, 0);
  for (int t = 0; t < 10; ++t) {
    const SpinConfig c = SpinConfig::random(s, Gauge::staggered, rng);
    const double h = energy(c, f.table);
    CHECK(std::abs(energy_primed(c, f.table, e0) - h) <= 1e-10 * std::abs(h));
  }
}

TEST_CASE("row sums of the staggered kernel at L = 4") {
  const auto& f = fixture(4);
  CHECK(primed_row_sum_deviation(f.table, f.fk.e0()) <= 1e-12);
}

TEST_CASE("chessboard inequality and descent") {
  const auto& f = fixture(2);
  const LatticeSpec& s = f.table.spec();
  const double e0n = f.fk.e0() * static_cast<double>(s.volume());
  auto rng = make_engine(2, 0);
  for (int t = 0; t < 5; ++t) {
    const SpinConfig c = SpinConfig::random(s, Gauge::original, rng);
    for (const auto& p : all_planes(s)) {
      const ChessboardEnergies e = chessboard_step(c, p, f.table);
      CHECK(e.original >= 0.5 * (e.positive + e.negative) - 1e-10 * std::abs(e0n));
    }
    const std::vector<double> d = chessboard_descent(c, f.table);
    for (std::size_t k = 1; k < d.size(); ++k) CHECK(d[k] <= d[k - 1] + 1e-10 * std::abs(e0n));
    CHECK(std::abs(d.back() - e0n) <= 1e-9 * std::abs(e0n));
  }
}

TEST_CASE("cross operator is positive semidefinite") {
  const auto& f = fixture(2);
  for (const auto& p : all_planes(f.table.spec())) {
    const CrossOperator op = cross_operator(f.table, p);
    CHECK(op.max_asymmetry < 1e-14);
    const auto ev = symmetric_eigenvalues(op.matrix, static_cast<int>(op.sites.size()) * op.dim);
    CHECK(ev.front() >= -1e-10);
  }
}

TEST_CASE("cross form of a ground state restriction is non-negative") {
  const auto& f = fixture(2);
  const LatticeSpec& s = f.table.spec();
  const std::vector<double> v{0.0, 0.6, 0.8};
  const SpinConfig g = ground_state(s, v, Site(s, {0, 0, 0}));
  const ReflectionPlane p{0, 0, 0};
  const CrossOperator op = cross_operator(f.table, p);
  std::vector<double> rho;
  for (std::size_t x : op.sites)
    for (double c : g.spin(x)) rho.push_back(c);
  CHECK(rp_cross_form(f.table, p, rho) >= -1e-12);
}

TEST_CASE("staggered reflection is gauge consistent") {
  const auto s = LatticeSpec::with_auto_epsilon(3, 2);
  auto rng = make_engine(4, 0);
  const SpinConfig c = SpinConfig::random(s, Gauge::staggered, rng);
  for (const auto& p : all_planes(s)) {
    const SpinConfig a = reflect(c, p);
    const SpinConfig b = reflect(c.to_original(), p).to_staggered();
    CHECK(max_diff(a.data(), b.data()) == 0.0);
  }
}

TEST_CASE("invalid reflection planes are rejected") {
  const auto s = LatticeSpec::with_auto_epsilon(3, 2);
  CHECK_THROWS_AS(reflect_site(s, {3, 0, 0}, 0), Error);
  CHECK_THROWS_AS(reflect_site(s, {0, 0, 3}, 0), Error);
}
