#include <doctest.h>

#include <cmath>

#include "dipole/bounds.hpp"
#include "dipole/error.hpp"

using namespace dipole;

namespace {

struct Fixture {
  KernelTable table;
  FourierKernel fk;
  ConstantsRecord c;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    KernelTable t = build_kernel(LatticeSpec::with_auto_epsilon(3, 4));
    FourierKernel fk = fourier_kernel(t);
    ConstantsRecord c = constants(t, fk);
    return Fixture{std::move(t), std::move(fk), c};
  }();
  return f;
}

}  // namespace

TEST_CASE("infrared bound table") {
  const auto& f = fixture();
  const IRBoundTable ir = ir_bound(f.fk, f.c, 5.0);
  const LatticeSpec& s = ir.spec;
  CHECK(ir.entries.size() == s.volume());
  for (int m = 0; m < 3; ++m) {
    const auto& e = ir.entries[special_momentum(s, m).index(s)];
    CHECK(e.special_axis == m);
    CHECK(std::isinf(e.diagonal[m]));
    for (int l = 0; l < 3; ++l)
      if (l != m) CHECK(e.diagonal[l] == doctest::Approx(3.0 / (2.0 * 5.0 * (f.c.alpha.value + f.c.gamma.value))));
    CHECK(e.gap_bound <= e.diagonal[(m + 1) % 3]);
  }
  CHECK(ir_consistency_check(ir).verdict == Verdict::pass);
}

TEST_CASE("infrared bound rejects non-positive beta") {
  const auto& f = fixture();
  CHECK_THROWS_AS(ir_bound(f.fk, f.c, 0.0), Error);
}

TEST_CASE("infrared bound decreases as 1/beta") {
  const auto& f = fixture();
  const IRBoundTable a = ir_bound(f.fk, f.c, 2.0);
  const IRBoundTable b = ir_bound(f.fk, f.c, 4.0);
  CHECK(b.entries[1].diagonal[0] == doctest::Approx(0.5 * a.entries[1].diagonal[0]));
}

TEST_CASE("Brillouin-zone integral converges") {
  const auto& f = fixture();
  const QuadratureResult q = lro_integral(3, f.c.alpha.value, f.c.gamma.value, 16, 64, 1);
  CHECK(q.raw.size() == 3);
  // Raw midpoint values increase toward the limit.
  CHECK(q.raw[0] < q.raw[1]);
  CHECK(q.raw[1] < q.raw[2]);
  CHECK(q.value > q.raw.back());
  CHECK(q.error < 0.01 * q.value);
  // The 32 and 64 grids agree within 1% after extrapolation.
  REQUIRE(q.extrapolated.size() == 2);
  CHECK(std::abs(q.extrapolated[1] - q.extrapolated[0]) <= 0.01 * q.extrapolated[1]);
}

TEST_CASE("c_d curve is increasing with a bracketed root") {
  const auto& f = fixture();
  const QuadratureResult q = lro_integral(3, f.c.alpha.value, f.c.gamma.value, 8, 32, 1);
  double prev = -1e300;
  for (double beta : {10.0, 50.0, 100.0, 200.0, 400.0, 800.0}) {
    const double v = c_d(3, q.value, beta);
    CHECK(v > prev);
    prev = v;
  }
  const LROEstimate e = lro_lower_bound(f.table.spec(), f.c, 200.0, q);
  CHECK(e.beta_d_lo <= e.beta_d);
  CHECK(e.beta_d <= e.beta_d_hi);
  CHECK(std::abs(c_d(3, q.value, e.beta_d)) < 1e-8);
}

TEST_CASE("finite-box bound increases with beta and hits the target") {
  const auto& f = fixture();
  const LatticeSpec& s = f.table.spec();
  const double a = f.c.alpha.value, g = f.c.gamma.value;
  CHECK(finite_volume_bound(s, a, g, 100.0) < finite_volume_bound(s, a, g, 200.0));
  const double beta = beta_for_finite_bound(s, a, g, 0.2);
  CHECK(finite_volume_bound(s, a, g, beta) == doctest::Approx(0.2).epsilon(1e-6));
  // The finite-box bound stays below 1/d.
  CHECK(finite_volume_bound(s, a, g, 1e6) < 1.0 / 3.0);
}
