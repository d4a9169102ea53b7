#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "dipole/error.hpp"
#include "dipole/yukawa.hpp"

using namespace dipole;

namespace {

constexpr double kPi = std::numbers::pi;

double max_diff(const SmallMatrix& a, const SmallMatrix& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("closed form small-screening limits") {
  const YukawaParams p{1e-9, 3};
  const std::array<double, 3> e1{1, 0, 0}, e3{0, 0, 1};
  const SmallMatrix h1 = yukawa_hessian_d3(e1, p);
  CHECK(h1(0, 0) == doctest::Approx(-1.0 / (2.0 * kPi)).epsilon(1e-7));
  const SmallMatrix h3 = yukawa_hessian_d3(e3, p);
  CHECK(h3(0, 0) == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-7));
  for (double eps : {0.1, 1.0, 3.0}) {
    const SmallMatrix h = yukawa_hessian_d3(e1, {eps, 3});
    CHECK(h(0, 1) == 0.0);
    CHECK(h(0, 2) == 0.0);
    CHECK(h(1, 2) == 0.0);
  }
}

TEST_CASE("closed form argument validation") {
  const std::array<double, 3> zero{0, 0, 0};
  CHECK_THROWS_AS(yukawa_hessian_d3(zero, {0.5, 3}), Error);
  const std::array<double, 4> x4{1, 0, 0, 0};
  CHECK_THROWS_AS(yukawa_hessian_d3(x4, {0.5, 4}), Error);
  const std::array<double, 3> x{1, 0, 0};
  CHECK_THROWS_AS(yukawa_hessian_d3(x, {0.0, 3}), Error);
}

TEST_CASE("closed form matches finite differences of the potential") {
  const YukawaParams p{0.3, 3};
  const std::array<double, 3> x{0.7, -1.1, 0.4};
  const SmallMatrix h = yukawa_hessian_d3(x, p);
  const double step = 1e-3;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      auto at = [&](double si, double sj) {
        std::array<double, 3> y = x;
        y[i] += si;
        y[j] += sj;
        return yukawa_value(y, p);
      };
      const double fd = (at(step, step) - at(step, -step) - at(-step, step) + at(-step, -step)) / (4 * step * step);
      CHECK(-fd == doctest::Approx(h(i, j)).epsilon(1e-5));
    }
}

TEST_CASE("trace identity away from the origin") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 50; ++k) {
    const std::array<double, 3> x{u(rng), u(rng), u(rng)};
    const YukawaParams p{0.05 + 0.02 * k, 3};
    const SmallMatrix h = yukawa_hessian_d3(x, p);
    const double tr = h(0, 0) + h(1, 1) + h(2, 2);
    const double y = yukawa_value(x, p);
    CHECK(std::abs(-tr - p.epsilon * p.epsilon * y) <= 1e-10 * p.epsilon * p.epsilon * y + 1e-300);
  }
}

TEST_CASE("general-dimension closed form satisfies the trace identity") {
  for (int d = 4; d <= 6; ++d) {
    std::array<double, 6> buf{0.9, -0.3, 1.4, 0.2, -0.8, 0.5};
    std::span<const double> x(buf.data(), d);
    const YukawaParams p{0.4, d};
    const SmallMatrix h = yukawa_hessian(x, p);
    double tr = 0.0;
    for (int i = 0; i < d; ++i) tr += h(i, i);
    CHECK(-tr == doctest::Approx(p.epsilon * p.epsilon * yukawa_value(x, p)).epsilon(1e-10));
    CHECK(h.max_asymmetry() == 0.0);
  }
}

TEST_CASE("slab representation agrees with the closed form in d = 3") {
  const std::array<double, 3> x{2, 1, 0};
  const YukawaParams p{0.25, 3};
  CHECK(max_diff(yukawa_hessian_slab(x, p).value, yukawa_hessian_d3(x, p)) <= 1e-8);

  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> u(-6, 6);
  for (int k = 0; k < 50; ++k) {
    std::array<double, 3> y{};
    do {
      for (auto& c : y) c = u(rng);
    } while (y[0] == 0 && y[1] == 0 && y[2] == 0);
    const YukawaParams q{0.0625, 3};
    CHECK(max_diff(yukawa_hessian_slab(y, q).value, yukawa_hessian_d3(y, q)) <= 1e-8);
  }
}

TEST_CASE("slab representation in d = 4") {
  const std::array<double, 4> x{1, 0, 0, 0};
  const YukawaParams p{0.25, 4};
  const SmallMatrix h = yukawa_hessian_slab(x, p).value;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) CHECK(h(i, j) == 0.0);
  const std::array<double, 4> y{2, -1, 1, 0};
  CHECK(max_diff(yukawa_hessian_slab(y, p).value, yukawa_hessian(y, p)) <= 1e-8);
}

TEST_CASE("coordinate swap symmetry") {
  const std::array<double, 3> a{1, 0, 0}, b{0, 1, 0};
  const YukawaParams p{0.5, 3};
  const SmallMatrix ha = yukawa_hessian_slab(a, p).value;
  const SmallMatrix hb = yukawa_hessian_slab(b, p).value;
  const int swap[3] = {1, 0, 2};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(ha(i, j) == doctest::Approx(hb(swap[i], swap[j])).epsilon(1e-10));
}

TEST_CASE("entry envelope bounds the closed form") {
  for (int d = 3; d <= 5; ++d)
    for (double r : {0.5, 1.0, 3.0, 10.0}) {
      const YukawaParams p{0.2, d};
      std::array<double, 6> buf{};
      buf[0] = r * 0.6;
      buf[1] = r * 0.8;
      const SmallMatrix h = yukawa_hessian(std::span<const double>(buf.data(), d), p);
      CHECK(h.max_abs() <= hessian_entry_envelope(r, p) * std::exp(-p.epsilon * r) * (1 + 1e-12));
    }
}
