#include "dipole/yukawa.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <algorithm>
#include <cmath>
#include <vector>
#include <numbers>
#include <string>
#include <utility>

#include "dipole/error.hpp"

namespace dipole {

namespace {

constexpr double kPi = std::numbers::pi;

void validate(std::span<const double> x, const YukawaParams& params) {
  if (params.dim < 3 || params.dim > kMaxDim)
    fail(ErrorCode::invalid_argument, "Yukawa dimension out of range");
  if (static_cast<int>(x.size()) != params.dim)
    fail(ErrorCode::invalid_argument, "Yukawa argument has wrong dimension");
  if (!(params.epsilon > 0.0))
    fail(ErrorCode::invalid_argument, "Yukawa screening mass must be positive");
}

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// K_{nu+1}(x) and K_{nu+2}(x) for nu = d/2 - 1, by upward recurrence from
// K_0, K_1 (even d) or the elementary K_{1/2}, K_{3/2} (odd d).
std::pair<double, double> bessel_k_shifted(int dim, double x) {
  double lo, hi, order;
  if (dim % 2 == 0) {
    lo = boost::math::cyl_bessel_k(0, x);
    hi = boost::math::cyl_bessel_k(1, x);
    order = 1.0;
  } else {
    lo = std::sqrt(kPi / (2.0 * x)) * std::exp(-x);
    hi = lo * (1.0 + 1.0 / x);
    order = 1.5;
  }
  const double target = 0.5 * dim;
  while (order < target) {
    const double next = lo + 2.0 * order / x * hi;
    lo = hi;
    hi = next;
    order += 1.0;
  }
  const double next = lo + 2.0 * order / x * hi;
  return {hi, next};
}

RadialParts radial_parts(double r, const YukawaParams& p) {
  const double eps = p.epsilon;
  if (p.dim == 3) {
    const double er = eps * r;
    const double pref = std::exp(-er) / (4.0 * kPi * r * r * r);
    return {-pref * (1.0 + er), pref * (3.0 + 3.0 * er + er * er)};
  }
  const double nu = 0.5 * p.dim - 1.0;
  const double c = std::pow(2.0 * kPi, -0.5 * p.dim);
  const auto [k1, k2] = bessel_k_shifted(p.dim, eps * r);
  const double a = -c * std::pow(eps, nu + 1.0) * std::pow(r, -nu - 1.0) * k1;
  const double b = c * std::pow(eps, nu + 2.0) * std::pow(r, -nu) * k2;
  return {a, b};
}

SmallMatrix from_radial(std::span<const double> x, double r, RadialParts parts) {
  const int d = static_cast<int>(x.size());
  SmallMatrix h(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const double v = parts.b * x[i] * x[j] / (r * r) + (i == j ? parts.a : 0.0);
      h(i, j) = -v;
      h(j, i) = -v;
    }
  return h;
}

// rho^{-mu} J_mu(kappa rho), continuous at rho = 0.
double scaled_bessel_j(double mu, double kappa, double rho) {
  const double z = kappa * rho;
  if (z < 1e-8) return std::pow(0.5 * kappa, mu) / std::tgamma(mu + 1.0);
  return std::pow(rho, -mu) * std::cyl_bessel_j(mu, z);
}

}  // namespace

RadialParts yukawa_radial_parts(double r, const YukawaParams& params) { return radial_parts(r, params); }

double yukawa_value(std::span<const double> x, const YukawaParams& params) {
  validate(x, params);
  const double r = norm(x);
  if (r == 0.0) fail(ErrorCode::invalid_argument, "Yukawa potential is singular at the origin");
  if (params.dim == 3) return std::exp(-params.epsilon * r) / (4.0 * kPi * r);
  const double nu = 0.5 * params.dim - 1.0;
  return std::pow(2.0 * kPi, -0.5 * params.dim) * std::pow(params.epsilon / r, nu) *
         std::cyl_bessel_k(nu, params.epsilon * r);
}

SmallMatrix yukawa_hessian_d3(std::span<const double> x, const YukawaParams& params) {
  validate(x, params);
  if (params.dim != 3)
    fail(ErrorCode::invalid_argument, "yukawa_hessian_d3 requires d = 3");
  const double r = norm(x);
  if (r == 0.0) fail(ErrorCode::invalid_argument, "dipole tensor is singular at the origin");
  return from_radial(x, r, radial_parts(r, params));
}

SmallMatrix yukawa_hessian(std::span<const double> x, const YukawaParams& params) {
  if (params.dim == 3) return yukawa_hessian_d3(x, params);
  validate(x, params);
  const double r = norm(x);
  if (r == 0.0) fail(ErrorCode::invalid_argument, "dipole tensor is singular at the origin");
  return from_radial(x, r, radial_parts(r, params));
}

double hessian_entry_envelope(double r, const YukawaParams& params) {
  // |entries| <= |A| + |B|; both carry the e^{-eps r} decay times a
  // non-increasing prefactor.
  const double eps = params.epsilon;
  if (params.dim == 3) {
    const double er = eps * r;
    return (4.0 + 4.0 * er + er * er) / (4.0 * kPi * r * r * r);
  }
  const double nu = 0.5 * params.dim - 1.0;
  const double c = std::pow(2.0 * kPi, -0.5 * params.dim);
  const double er = eps * r;
  // e^{z} K_mu(z) is decreasing for mu >= 1/2.
  const auto [k1, k2] = bessel_k_shifted(params.dim, er);
  const double ka = k1 * std::exp(er);
  const double kb = k2 * std::exp(er);
  return c * std::pow(eps, nu + 1.0) * (std::pow(r, -nu - 1.0) * ka + eps * std::pow(r, -nu) * kb);
}

SlabHessian yukawa_hessian_slab(std::span<const double> x, const YukawaParams& params,
                                const SlabOptions& options) {
  validate(x, params);
  const int d = params.dim;
  int axis = 0;
  for (int k = 1; k < d; ++k)
    if (std::abs(x[k]) > std::abs(x[axis])) axis = k;
  const double z = std::abs(x[axis]);
  if (z == 0.0) fail(ErrorCode::invalid_argument, "dipole tensor is singular at the origin");
  const double sgn = x[axis] > 0.0 ? 1.0 : -1.0;

  std::array<int, kMaxDim> transverse{};
  std::array<double, kMaxDim> y{};
  int n = 0;
  double rho2 = 0.0;
  for (int k = 0; k < d; ++k) {
    if (k == axis) continue;
    transverse[n] = k;
    y[n] = x[k];
    rho2 += x[k] * x[k];
    ++n;
  }
  const double rho = std::sqrt(rho2);
  const double eps = params.epsilon;
  const double half_n = 0.5 * n;
  const double nu = half_n - 1.0;

  // Integrands carry e^{-z omega}; stop where the tail is far below 1e-18.
  double kmax = 1.0;
  while (z * std::sqrt(kmax * kmax + eps * eps) - (half_n + 3.0) * std::log1p(kmax) < 48.0) kmax *= 1.25;
  const double panel = std::min(kmax, kPi / std::max(rho, 0.5));

  using Integrator = boost::math::quadrature::gauss_kronrod<double, 31>;
  double total_error = 0.0;
  bool converged = true;
  // Global adaptive bisection: split the panel with the largest error until
  // the summed error is below rel_tol times the L1 size of the integrand.
  auto integrate = [&](auto&& f) {
    struct Piece {
      double a, b, value, error;
    };
    std::vector<Piece> pieces;
    double l1_total = 0.0;
    for (double a = 0.0; a < kmax; a += panel) {
      const double b = std::min(kmax, a + panel);
      double err = 0.0, l1 = 0.0;
      const double v = Integrator::integrate(f, a, b, 0, 0.0, &err, &l1);
      pieces.push_back({a, b, v, err});
      l1_total += l1;
    }
    const double target = options.rel_tol * std::max(l1_total, 1e-300);
    const int max_pieces = static_cast<int>(pieces.size()) + (1 << options.max_depth);
    auto worse = [](const Piece& x, const Piece& y) { return x.error < y.error; };
    std::make_heap(pieces.begin(), pieces.end(), worse);
    auto error_sum = [&] {
      double e = 0.0;
      for (const auto& p : pieces) e += p.error;
      return e;
    };
    double err_sum = error_sum();
    while (err_sum > target) {
      if (static_cast<int>(pieces.size()) >= max_pieces) {
        converged = false;
        break;
      }
      std::pop_heap(pieces.begin(), pieces.end(), worse);
      const Piece w = pieces.back();
      pieces.pop_back();
      const double m = 0.5 * (w.a + w.b);
      double e1 = 0.0, e2 = 0.0;
      const double v1 = Integrator::integrate(f, w.a, m, 0, 0.0, &e1);
      const double v2 = Integrator::integrate(f, m, w.b, 0, 0.0, &e2);
      pieces.push_back({w.a, m, v1, e1});
      std::push_heap(pieces.begin(), pieces.end(), worse);
      pieces.push_back({m, w.b, v2, e2});
      std::push_heap(pieces.begin(), pieces.end(), worse);
      err_sum += e1 + e2 - w.error;
      if (pieces.size() % 64 == 0) err_sum = error_sum();
    }
    double sum = 0.0;
    std::sort(pieces.begin(), pieces.end(), [](const Piece& x, const Piece& y) { return x.a < y.a; });
    for (const auto& p : pieces) sum += p.value;
    total_error += error_sum();
    return sum;
  };

  const double ia = integrate([&](double k) {
    const double w = std::sqrt(k * k + eps * eps);
    return w * std::exp(-z * w) * std::pow(k, half_n) * scaled_bessel_j(nu, k, rho);
  });
  const double ib = integrate([&](double k) {
    const double w = std::sqrt(k * k + eps * eps);
    return std::exp(-z * w) * std::pow(k, half_n + 1.0) * scaled_bessel_j(nu + 1.0, k, rho);
  });
  const double ic1 = integrate([&](double k) {
    const double w = std::sqrt(k * k + eps * eps);
    return std::exp(-z * w) / w * std::pow(k, half_n + 1.0) * scaled_bessel_j(nu + 1.0, k, rho);
  });
  const double ic2 = integrate([&](double k) {
    const double w = std::sqrt(k * k + eps * eps);
    return std::exp(-z * w) / w * std::pow(k, half_n + 2.0) * scaled_bessel_j(nu + 2.0, k, rho);
  });

  const double kn = std::pow(2.0 * kPi, half_n);
  const double c = 1.0 / (2.0 * std::pow(2.0 * kPi, n));
  const double ck = c * kn;

  SlabHessian out;
  out.value = SmallMatrix(d);
  SmallMatrix& h = out.value;
  h(axis, axis) = -ck * ia;
  for (int j = 0; j < n; ++j) {
    const double v = -sgn * ck * y[j] * ib;
    h(axis, transverse[j]) = v;
    h(transverse[j], axis) = v;
    for (int l = 0; l < n; ++l)
      h(transverse[j], transverse[l]) = ck * ((j == l ? ic1 : 0.0) - y[j] * y[l] * ic2);
  }
  double scale = std::max(rho2, 1.0);
  out.error_estimate = ck * total_error * scale;

  const double magnitude = std::max(h.max_abs(), 1e-300);
  if (!converged || !std::isfinite(magnitude))
    fail(ErrorCode::numerical, "slab quadrature did not converge: error estimate " +
                                   std::to_string(out.error_estimate) + " for entries of size " +
                                   std::to_string(magnitude));
  return out;
}

}  // namespace dipole
