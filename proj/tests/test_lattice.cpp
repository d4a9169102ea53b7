#include <doctest.h>

#include <set>

#include "dipole/error.hpp"
#include "dipole/lattice.hpp"

using namespace dipole;

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(LatticeSpec::with_auto_epsilon(2, 4), Error);
  CHECK_THROWS_AS(LatticeSpec::with_auto_epsilon(3, 3), Error);
  CHECK_THROWS_AS(LatticeSpec::with_auto_epsilon(3, 0), Error);
  CHECK_THROWS_AS(LatticeSpec::with_epsilon(3, 4, 0.0), Error);
  const auto s = LatticeSpec::with_auto_epsilon(3, 4);
  CHECK(s.epsilon() == doctest::Approx(1.0 / 8.0));
  CHECK(s.volume() == 512);
  CHECK(LatticeSpec::with_auto_epsilon(3, 8).epsilon() < s.epsilon());
}

TEST_CASE("reduction is idempotent") {
  const auto s = LatticeSpec::with_auto_epsilon(3, 2);
  for (long long x = -20; x <= 20; ++x) {
    const int r = s.reduce(x);
    CHECK(r >= -1);
    CHECK(r <= 2);
    CHECK(s.reduce(r) == r);
    CHECK((x - r) % 4 == 0);
  }
}

TEST_CASE("stagger sign examples") {
  const auto s = LatticeSpec::with_auto_epsilon(3, 2);
  for (int i = 0; i < 3; ++i) CHECK(stagger_sign(Site(s, {0, 0, 0}), i) == 1);
  CHECK(stagger_sign(Site(s, {1, 0, 0}), 0) == 1);
  CHECK(stagger_sign(Site(s, {1, 0, 0}), 1) == -1);
  CHECK_THROWS_AS(stagger_sign(Site(s, {1, 0, 0}), 3), Error);
  CHECK_THROWS_AS(stagger_sign(Site(s, {1, 0, 0}), -1), Error);
}

TEST_CASE("stagger sign products depend on x_i + x_j parity") {
  const auto s = LatticeSpec::with_auto_epsilon(3, 2);
  for (std::size_t k = 0; k < s.volume(); ++k) {
    const Site x = Site::from_index(s, k);
    for (int i = 0; i < 3; ++i) {
      CHECK(stagger_sign(x, i) * stagger_sign(x, i) == 1);
      for (int j = 0; j < 3; ++j) {
        const int expected = ((x[i] + x[j]) % 2 == 0) ? 1 : -1;
        CHECK(stagger_sign(x, i) * stagger_sign(x, j) == expected);
      }
    }
  }
}

TEST_CASE("period-4 functions") {
  const int f0[] = {1, 1, -1, -1}, f1[] = {-1, 1, 1, -1}, g0[] = {1, 0, -1, 0}, g1[] = {0, 1, 0, -1};
  for (int r = 0; r < 4; ++r) {
    CHECK(period4(Period4::f0, r) == f0[r]);
    CHECK(period4(Period4::f1, r) == f1[r]);
    CHECK(period4(Period4::g0, r) == g0[r]);
    CHECK(period4(Period4::g1, r) == g1[r]);
    CHECK(period4(Period4::g0, r - 8) == g0[r]);
  }
  CHECK(period4_from_name("g1") == Period4::g1);
  CHECK_THROWS_AS(period4_from_name("h2"), Error);
  for (int x = 0; x < 8; ++x)
    for (int y = 0; y < 8; ++y) {
      const int sign = (x % 2 == 0) ? 1 : -1;
      CHECK(period4(Period4::f1, x) * period4(Period4::f1, y) ==
            period4(Period4::g0, x - y) + sign * period4(Period4::g1, x - y));
    }
}

TEST_CASE("momentum grid") {
  const auto s = LatticeSpec::with_auto_epsilon(3, 2);
  const auto grid = momentum_grid(s);
  CHECK(grid.size() == 64);
  std::set<std::size_t> seen;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(grid[k].index(s) == k);
    CHECK(Momentum::from_index(s, k) == grid[k]);
    seen.insert(grid[k].index(s));
    for (int a = 0; a < 3; ++a) {
      const double c = grid[k].component(a, 2);
      CHECK(c >= 0.0);
      CHECK(c < 2.0 * 3.14159265358979);
    }
  }
  CHECK(seen.size() == 64);
  const Momentum pi0 = special_momentum(s, 0);
  CHECK(pi0 == Momentum(s, {0, 2, 2}));
  CHECK(special_axis(s, pi0) == 0);
  CHECK(special_axis(s, Momentum(s, {0, 0, 0})) == -1);
  for (int a = 0; a < 3; ++a) CHECK(std::count(grid.begin(), grid.end(), special_momentum(s, a)) == 1);
}

TEST_CASE("site index round trip") {
  const auto s = LatticeSpec::with_auto_epsilon(4, 2);
  for (std::size_t k = 0; k < s.volume(); ++k) CHECK(Site::from_index(s, k).index(s) == k);
  CHECK(Site(s, {5, -3, 4, 0}) == Site(s, {1, 1, 0, 0}));
}
