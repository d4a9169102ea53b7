#include "dipole/bounds.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "dipole/error.hpp"

namespace dipole {

namespace {

constexpr double kPi = std::numbers::pi;

double denominator(int d, int l, const double* s2, const double* c2, double alpha, double gamma) {
  double c = 0.0;
  for (int j = 0; j < d; ++j)
    if (j != l) c += c2[j];
  return alpha * s2[l] + gamma * c;
}

}  // namespace

IRBoundTable ir_bound(const FourierKernel& fk, const ConstantsRecord& c, double beta) {
  if (!(beta > 0.0)) fail(ErrorCode::invalid_argument, "beta must be positive");
  const LatticeSpec& s = fk.spec();
  const int d = s.dim();
  const int L = s.half_side();
  IRBoundTable t{s, beta, std::vector<IRBoundEntry>(s.volume())};
  const double alpha = c.alpha.value;
  const double gamma = c.gamma.value;
  const double gap = c.e1.value - c.e0.value;
  for (std::size_t m = 0; m < s.volume(); ++m) {
    const Momentum p = Momentum::from_index(s, m);
    IRBoundEntry& e = t.entries[m];
    e.special_axis = special_axis(s, p);
    std::array<double, kMaxDim> s2{}, c2{};
    for (int j = 0; j < d; ++j) {
      const double h = 0.5 * p.component(j, L);
      s2[j] = std::sin(h) * std::sin(h);
      c2[j] = std::cos(h) * std::cos(h);
    }
    for (int l = 0; l < d; ++l) {
      const double den = denominator(d, l, s2.data(), c2.data(), alpha, gamma);
      e.quadratic[l] = den > 0.0 ? d / (2.0 * beta * den) : std::numeric_limits<double>::infinity();
    }
    if (e.special_axis >= 0) {
      e.gap_bound = 1.0 / (2.0 * beta * gap);
      for (int l = 0; l < d; ++l)
        e.diagonal[l] = (l == e.special_axis) ? std::numeric_limits<double>::infinity()
                                              : d / (2.0 * beta * (alpha + gamma));
      continue;
    }
    const SymmetricEigen eig = jacobi_eigen(fk.shifted(m));
    if (!(eig.values.front() > 1e-12 * c.scale))
      fail(ErrorCode::numerical, "shifted kernel is singular off the zero set at momentum index " + std::to_string(m));
    e.inverse = SmallMatrix(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double v = 0.0;
        for (int k = 0; k < d; ++k) v += eig.vector(i, k) * eig.vector(j, k) / eig.values[k];
        e.inverse(i, j) = v / (2.0 * beta);
      }
    for (int l = 0; l < d; ++l) e.diagonal[l] = e.inverse(l, l);
  }
  return t;
}

Check ir_consistency_check(const IRBoundTable& table, double rel_tol) {
  const int d = table.spec.dim();
  double worst = HUGE_VAL;
  for (const auto& e : table.entries) {
    if (e.special_axis >= 0) continue;
    for (int l = 0; l < d; ++l) worst = std::min(worst, (e.quadratic[l] - e.diagonal[l]) / e.quadratic[l]);
  }
  return make_check("ir_bound_below_quadratic_bound", "inverse kernel below inverse of Y(p)", worst >= -rel_tol,
                    worst + rel_tol, rel_tol);
}

QuadratureResult lro_integral(int dim, double alpha, double gamma, int n0, int n_max, int threads) {
  if (dim < 3) fail(ErrorCode::invalid_argument, "the integrand is not integrable for d < 3");
  if (n0 < 2 || n0 % 2 != 0 || n_max < 2 * n0)
    fail(ErrorCode::invalid_argument, "quadrature grids must be even with at least two refinements");
  QuadratureResult r;
  for (int n = n0; n <= n_max; n *= 2) {
    // Tabulate per-axis factors; slices along axis 0 are independent.
    std::vector<double> s2(n), c2(n);
    for (int k = 0; k < n; ++k) {
      const double h = kPi * (k + 0.5) / n;
      s2[k] = std::sin(h) * std::sin(h);
      c2[k] = std::cos(h) * std::cos(h);
    }
    std::vector<long double> partial(n, 0.0L);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t k0) {
      std::array<int, kMaxDim> idx{};
      idx[0] = static_cast<int>(k0);
      long double sum = 0.0L;
      for (;;) {
        double c = 0.0;
        for (int j = 1; j < dim; ++j) c += c2[idx[j]];
        sum += 1.0 / (alpha * s2[idx[0]] + gamma * c);
        int j = dim - 1;
        while (j >= 1 && idx[j] == n - 1) {
          idx[j] = 0;
          --j;
        }
        if (j < 1) break;
        ++idx[j];
      }
      partial[k0] = sum;
    });
    long double total = 0.0L;
    for (long double v : partial) total += v;
    r.grids.push_back(n);
    r.raw.push_back(static_cast<double>(total / std::pow(static_cast<long double>(n), dim)));
    if (r.raw.size() >= 2) r.extrapolated.push_back(2.0 * r.raw.back() - r.raw[r.raw.size() - 2]);
  }
  r.value = r.extrapolated.back();
  r.error = r.extrapolated.size() >= 2 ? std::abs(r.extrapolated.back() - r.extrapolated[r.extrapolated.size() - 2])
                                       : std::abs(r.raw.back() - r.raw[r.raw.size() - 2]);
  return r;
}

double finite_volume_bound(const LatticeSpec& spec, double alpha, double gamma, double beta, int component) {
  if (!(beta > 0.0)) fail(ErrorCode::invalid_argument, "beta must be positive");
  const int d = spec.dim();
  const int L = spec.half_side();
  if (component < 0 || component >= d) fail(ErrorCode::invalid_argument, "component out of range");
  const std::size_t excluded = special_momentum(spec, component).index(spec);
  long double sum = 0.0L;
  std::size_t skipped = 0;
  for (std::size_t m = 0; m < spec.volume(); ++m) {
    if (m == excluded) {
      ++skipped;
      continue;
    }
    const Momentum p = Momentum::from_index(spec, m);
    std::array<double, kMaxDim> s2{}, c2{};
    for (int j = 0; j < d; ++j) {
      const double h = 0.5 * p.component(j, L);
      s2[j] = std::sin(h) * std::sin(h);
      c2[j] = std::cos(h) * std::cos(h);
    }
    sum += 1.0 / denominator(d, component, s2.data(), c2.data(), alpha, gamma);
  }
  if (skipped != 1) fail(ErrorCode::internal, "excluded-momentum bookkeeping failed");
  return 1.0 / d - d / (2.0 * beta * static_cast<double>(spec.volume())) * static_cast<double>(sum);
}

double c_d(int dim, double integral, double beta) { return 1.0 - dim * dim / (2.0 * beta) * integral; }

namespace {

double bisect_root(int dim, double integral) {
  double lo = 1e-6, hi = 1.0;
  while (c_d(dim, integral, hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (c_d(dim, integral, mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

LROEstimate lro_lower_bound(const LatticeSpec& spec, const ConstantsRecord& c, double beta, const QuadratureResult& q) {
  if (spec.dim() < 3) fail(ErrorCode::invalid_argument, "the integrand is not integrable for d < 3");
  const int d = spec.dim();
  LROEstimate e;
  e.beta = beta;
  e.finite_volume = finite_volume_bound(spec, c.alpha.value, c.gamma.value, beta);
  e.c_d = c_d(d, q.value, beta);
  e.c_d_error = d * d / (2.0 * beta) * q.error;
  e.beta_d = bisect_root(d, q.value);
  e.beta_d_lo = bisect_root(d, q.value - q.error);
  e.beta_d_hi = bisect_root(d, q.value + q.error);
  return e;
}

double beta_for_finite_bound(const LatticeSpec& spec, double alpha, double gamma, double target) {
  if (!(target < 1.0 / spec.dim())) fail(ErrorCode::invalid_argument, "target must be below 1/d");
  double lo = 1e-3, hi = 1.0;
  while (finite_volume_bound(spec, alpha, gamma, hi) < target) hi *= 2.0;
  for (int it = 0; it < 100 && hi - lo > 1e-10 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (finite_volume_bound(spec, alpha, gamma, mid) < target ? lo : hi) = mid;
  }
  return hi;
}

void write_cd_curve_csv(const LatticeSpec& spec, const ConstantsRecord& c, const QuadratureResult& q,
                        const std::vector<double>& betas, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << std::setprecision(17) << "beta,finite_volume_bound,c_d,c_d_error\n";
  const int d = spec.dim();
  for (double b : betas)
    out << b << "," << finite_volume_bound(spec, c.alpha.value, c.gamma.value, b) << "," << c_d(d, q.value, b) << ","
        << d * d / (2.0 * b) * q.error << "\n";
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace dipole
