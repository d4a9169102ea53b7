#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dipole/error.hpp"
#include "dipole/kernel.hpp"

using namespace dipole;

namespace {

const KernelTable& small_table() {
  static const KernelTable t = build_kernel(LatticeSpec::with_auto_epsilon(3, 2));
  return t;
}

Site negate(const LatticeSpec& s, const Site& x) {
  std::array<int, kMaxDim> c{};
  for (int k = 0; k < x.dim(); ++k) c[k] = -x[k];
  return Site(s, std::span<const int>(c.data(), x.dim()));
}

}  // namespace

TEST_CASE("image sum converges") {
  const auto spec = LatticeSpec::with_epsilon(3, 2, 1.0);
  KernelBuildOptions o;
  o.tol = 1e-12;
  const KernelTable a = build_kernel(spec, o);
  CHECK(a.truncation_error_bound() <= o.tol);
  o.min_cutoff = a.image_cutoff() + 2;
  const KernelTable b = build_kernel(spec, o);
  CHECK(b.image_cutoff() >= a.image_cutoff() + 2);
  double diff = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) diff = std::max(diff, std::abs(a.data()[k] - b.data()[k]));
  CHECK(diff < o.tol);
}

TEST_CASE("unreachable tolerance is reported") {
  KernelBuildOptions o;
  o.tol = 1e-30;
  o.max_radius_in_L = 4;
  CHECK_THROWS_AS(build_kernel(LatticeSpec::with_auto_epsilon(3, 2), o), Error);
  o.tol = -1.0;
  CHECK_THROWS_AS(build_kernel(LatticeSpec::with_auto_epsilon(3, 2), o), Error);
}

TEST_CASE("kernel parity and symmetry") {
  const KernelTable& t = small_table();
  const auto& s = t.spec();
  for (std::size_t k = 0; k < s.volume(); ++k) {
    const Site x = Site::from_index(s, k);
    const SmallMatrix w = t.at(k);
    CHECK(w.max_asymmetry() == 0.0);
    CHECK((w - t.at(negate(s, x))).max_abs() == 0.0);
  }
}

TEST_CASE("head-to-tail sign of the off-diagonal coupling") {
  const auto spec = LatticeSpec::with_epsilon(3, 4, 1.0 / 8.0);
  KernelBuildOptions o;
  o.tol = 1e-9;
  const KernelTable t = build_kernel(spec, o);
  CHECK(t.at(Site(spec, {1, 1, 0}))(0, 1) < 0.0);
  CHECK(t.at(Site(spec, {1, -1, 0}))(0, 1) > 0.0);
}

TEST_CASE("Fourier kernel structure") {
  const KernelTable& t = small_table();
  const auto& s = t.spec();
  const FourierKernel fk = fourier_kernel(t);
  double max_entry = 0.0;
  for (double v : t.data()) max_entry = std::max(max_entry, std::abs(v));
  CHECK(fk.max_imag_residual() <= 1e-10 * max_entry);

  const SmallMatrix w0 = fk.at(Momentum(s, {0, 0, 0}));
  CHECK(std::abs(w0(0, 1)) + std::abs(w0(0, 2)) + std::abs(w0(1, 2)) <= 1e-12 * max_entry);
  CHECK(w0(0, 0) == doctest::Approx(w0(1, 1)).epsilon(1e-12));
  CHECK(w0(0, 0) == doctest::Approx(w0(2, 2)).epsilon(1e-12));

  CHECK(std::abs(fk.e0() - fk.e0_fourier()) <= 1e-8 * std::abs(fk.e0()));
  for (int l = 0; l < 3; ++l) CHECK(fk.at(special_momentum(s, l))(l, l) == doctest::Approx(fk.e0()).epsilon(1e-8));

  for (const Momentum& p : momentum_grid(s)) {
    const SmallMatrix w = fk.at(p);
    CHECK(w.max_asymmetry() == 0.0);
    const int L = s.half_side();
    if (p.m(0) % L == 0 || p.m(1) % L == 0) CHECK(std::abs(w(0, 1)) <= 1e-12 * max_entry);
  }

  double trace_sum = 0.0;
  for (std::size_t m = 0; m < s.volume(); ++m) {
    const SmallMatrix w = fk.at(m);
    trace_sum += w(0, 0) + w(1, 1) + w(2, 2);
  }
  const SmallMatrix wz = t.at(std::size_t{0});
  const double tr0 = wz(0, 0) + wz(1, 1) + wz(2, 2);
  CHECK(trace_sum == doctest::Approx(s.volume() * tr0).epsilon(1e-10));
}

TEST_CASE("fast transform matches the direct sum") {
  const KernelTable& t = small_table();
  const auto& s = t.spec();
  const FourierKernel fk = fourier_kernel(t);
  for (auto m : {std::array<int, 3>{0, 0, 0}, {1, 2, 3}, {3, 1, 0}, {0, 2, 2}, {1, 1, 1}}) {
    const Momentum p(s, std::span<const int>(m.data(), 3));
    double imag = 1.0;
    const SmallMatrix direct = direct_fourier_entry(t, p, &imag);
    CHECK(imag <= 1e-12);
    CHECK((direct - fk.at(p)).max_abs() <= 1e-12);
  }
}

TEST_CASE("kernel cache round trip and corruption detection") {
  const KernelTable& t = small_table();
  const auto dir = std::filesystem::temp_directory_path() / "dipole_kernel_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "k.bin";
  save_kernel(t, path);
  const KernelTable u = load_kernel(path);
  CHECK(u.spec() == t.spec());
  CHECK(u.image_cutoff() == t.image_cutoff());
  REQUIRE(u.data().size() == t.data().size());
  CHECK(std::equal(u.data().begin(), u.data().end(), t.data().begin()));

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);
    char c = 0x5a;
    f.write(&c, 1);
  }
  CHECK_THROWS_AS(load_kernel(path), Error);
  CHECK_THROWS_AS(load_kernel(dir / "missing.bin"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("general dimension kernel") {
  const auto spec = LatticeSpec::with_epsilon(4, 2, 0.5);
  KernelBuildOptions o;
  o.tol = 1e-8;
  const KernelTable t = build_kernel(spec, o);
  const FourierKernel fk = fourier_kernel(t);
  for (int l = 0; l < 4; ++l) CHECK(fk.at(special_momentum(spec, l))(l, l) == doctest::Approx(fk.e0()).epsilon(1e-8));
}
