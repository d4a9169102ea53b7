#include "dipole/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "dipole/error.hpp"

namespace dipole {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(15) << v;
  return os.str();
}

// Sum over m in [-K, K]^n of f(m), plus the tail bound for |m|_inf > K when
// every term with |m|_inf = s is at most 4 w e^{-w}/(1 - e^{-4 pi}) with
// w >= pi (2s - 1).
template <class Term>
SeriesValue mode_sum(int n, int shells, Term&& term) {
  if (shells < 1) fail(ErrorCode::invalid_argument, "series needs at least one shell");
  std::array<int, kMaxDim> m{};
  for (int k = 0; k < n; ++k) m[k] = -shells;
  long double sum = 0.0L;
  for (;;) {
    sum += term(m);
    int k = n - 1;
    while (k >= 0 && m[k] == shells) {
      m[k] = -shells;
      --k;
    }
    if (k < 0) break;
    ++m[k];
  }
  const double c = 4.0 / (1.0 - std::exp(-4.0 * kPi));
  double tail = 0.0;
  for (int s = shells + 1; s < shells + 2000; ++s) {
    const double count = std::pow(2.0 * s + 1.0, n) - std::pow(2.0 * s - 1.0, n);
    const double w = kPi * (2.0 * s - 1.0);
    const double t = count * c * w * std::exp(-w);
    tail += t;
    if (t < 1e-30 * std::max(tail, 1e-300)) break;
  }
  return {static_cast<double>(sum), tail, shells};
}

double weighted_sum(const KernelTable& t, int stagger_axis, int entry, bool period4_weight) {
  const LatticeSpec& s = t.spec();
  long double sum = 0.0L;
  for (std::size_t k = 0; k < s.volume(); ++k) {
    const Site x = Site::from_index(s, k);
    double w = stagger_sign(x, stagger_axis);
    if (period4_weight) w *= 1.0 - period4(Period4::g0, x[0]);
    if (w != 0.0) sum += w * t.entry(k, entry, entry);
  }
  return static_cast<double>(sum);
}

void require_agreement(const std::string& what, double a, double b, double rel_tol) {
  if (!(std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b))))
    fail(ErrorCode::numerical, what + " disagreement: " + fmt(a) + " vs " + fmt(b));
}

}  // namespace

SeriesValue alpha_series(const YukawaParams& params, int shells) {
  const int n = params.dim - 1;
  const double eps2 = params.epsilon * params.epsilon;
  return mode_sum(n, shells, [&](const std::array<int, kMaxDim>& m) {
    double k2 = eps2;
    for (int j = 0; j < n; ++j) {
      const double kj = kPi * (2.0 * m[j] + 1.0);
      k2 += kj * kj;
    }
    const double w = std::sqrt(k2);
    const double q = std::exp(-w);
    const double q2 = q * q;
    return w * q * (1.0 + q) * (1.0 + q) / (1.0 - q2 * q2);
  });
}

SeriesValue gamma_series(const YukawaParams& params, int shells) {
  const int n = params.dim - 1;
  const double eps2 = params.epsilon * params.epsilon;
  return mode_sum(n, shells, [&](const std::array<int, kMaxDim>& m) {
    if (m[0] == 0) return 0.0;
    const double k1 = 2.0 * kPi * m[0];
    double k2 = eps2 + k1 * k1;
    for (int j = 1; j < n; ++j) {
      const double kj = kPi * (2.0 * m[j] + 1.0);
      k2 += kj * kj;
    }
    const double w = std::sqrt(k2);
    const double q = std::exp(-w);
    const double q2 = q * q;
    return k1 * k1 / w * q * (1.0 - q) * (1.0 - q) / (1.0 - q2 * q2);
  });
}

double spectral_scale(const FourierKernel& fk) {
  double scale = 0.0;
  for (std::size_t m = 0; m < fk.spec().volume(); ++m) {
    const SymmetricEigen e = jacobi_eigen(fk.shifted(m));
    scale = std::max({scale, std::abs(e.values.front()), std::abs(e.values.back())});
  }
  return scale;
}

ConstantsRecord constants(const KernelTable& table, const FourierKernel& fk, const ConstantsOptions& options) {
  const LatticeSpec& s = table.spec();
  if (!(s == fk.spec())) fail(ErrorCode::invalid_argument, "kernel and Fourier kernel describe different lattices");
  const int d = s.dim();
  const double entry_err = table.truncation_error_bound() * static_cast<double>(s.volume());
  ConstantsRecord r;
  r.dim = d;
  r.epsilon = s.epsilon();

  r.e0 = {weighted_sum(table, 0, 0, false), entry_err, "real-space"};
  r.e0_fourier = {fk.at(special_momentum(s, 0))(0, 0), entry_err, "fourier"};
  r.e1 = {weighted_sum(table, 1, 0, false), entry_err, "real-space"};
  r.e1_fourier = {fk.at(special_momentum(s, 1))(0, 0), entry_err, "fourier"};
  require_agreement("e0 (real-space vs Fourier)", r.e0.value, r.e0_fourier.value, options.e_rel_tol);
  require_agreement("e1 (real-space vs Fourier)", r.e1.value, r.e1_fourier.value, options.e_rel_tol);

  // With the sign fixed so that both are positive.
  r.alpha = {-weighted_sum(table, 0, 0, true), 2.0 * entry_err, "real-space"};
  r.gamma = {-weighted_sum(table, 1, 1, true), 2.0 * entry_err, "real-space"};
  const YukawaParams yp{s.epsilon(), d};
  const SeriesValue as = alpha_series(yp, options.series_shells);
  const SeriesValue gs = gamma_series(yp, options.series_shells);
  r.alpha_series = {as.value, as.tail_bound, "series"};
  r.gamma_series = {gs.value, gs.tail_bound, "series"};

  if (!(r.alpha.value > 0.0)) fail(ErrorCode::numerical, "alpha is not positive: " + fmt(r.alpha.value));
  if (!(r.gamma.value > 0.0)) fail(ErrorCode::numerical, "gamma is not positive: " + fmt(r.gamma.value));
  require_agreement("alpha (real-space vs series)", r.alpha.value, r.alpha_series.value, options.alpha_rel_tol);
  require_agreement("gamma (real-space vs series)", r.gamma.value, r.gamma_series.value, options.gamma_rel_tol);

  r.scale = spectral_scale(fk);
  return r;
}

SmallMatrix bound_matrix(const LatticeSpec& spec, const Momentum& p, double alpha, double gamma) {
  const int d = spec.dim();
  const int L = spec.half_side();
  std::array<double, kMaxDim> s2{}, c2{};
  for (int i = 0; i < d; ++i) {
    const double h = 0.5 * p.component(i, L);
    s2[i] = std::sin(h) * std::sin(h);
    c2[i] = std::cos(h) * std::cos(h);
  }
  SmallMatrix y(d);
  for (int i = 0; i < d; ++i) {
    double c = 0.0;
    for (int l = 0; l < d; ++l)
      if (l != i) c += c2[l];
    y(i, i) = (alpha * s2[i] + gamma * c) / d;
  }
  return y;
}

SpectrumTable psd_sweep(const FourierKernel& fk, double zero_tol, double alpha, double gamma, int threads) {
  const LatticeSpec& s = fk.spec();
  const int d = s.dim();
  const std::size_t N = s.volume();
  SpectrumTable t{s, std::vector<MomentumSpectrum>(N), 0.0, 0.0, 0, {}, 0.0};
  std::vector<double> ortho(N, 0.0);
  const bool with_bound = alpha > 0.0 && gamma > 0.0;
  parallel_for(N, threads, [&](std::size_t m) {
    const SmallMatrix w0 = fk.shifted(m);
    const SymmetricEigen e = jacobi_eigen(w0);
    MomentumSpectrum& out = t.entries[m];
    out.eigenvalues = e.values;
    out.eigenvectors.resize(static_cast<std::size_t>(d) * d);
    for (int k = 0; k < d; ++k)
      for (int r = 0; r < d; ++r) out.eigenvectors[static_cast<std::size_t>(k) * d + r] = e.vector(r, k);
    double err = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double dot = 0.0;
        for (int r = 0; r < d; ++r) dot += e.vector(r, a) * e.vector(r, b);
        err = std::max(err, std::abs(dot - (a == b ? 1.0 : 0.0)));
      }
    ortho[m] = err;
    if (with_bound) {
      const SmallMatrix diff = w0 - bound_matrix(s, Momentum::from_index(s, m), alpha, gamma);
      out.bound_margin = jacobi_eigen(diff).values.front();
    }
  });
  t.min_eigenvalue = t.entries[0].eigenvalues.front();
  for (std::size_t m = 0; m < N; ++m) {
    const auto& ev = t.entries[m].eigenvalues;
    t.scale = std::max({t.scale, std::abs(ev.front()), std::abs(ev.back())});
    if (ev.front() < t.min_eigenvalue) {
      t.min_eigenvalue = ev.front();
      t.min_momentum = m;
    }
    t.max_orthonormality_error = std::max(t.max_orthonormality_error, ortho[m]);
  }
  for (std::size_t m = 0; m < N; ++m) {
    bool zero = false;
    for (double v : t.entries[m].eigenvalues) zero = zero || std::abs(v) <= zero_tol * t.scale;
    if (zero) t.zero_set.push_back(m);
  }
  return t;
}

CurvatureFit curvature_fit(const FourierKernel& fk, int axis, double alpha) {
  const LatticeSpec& s = fk.spec();
  const int d = s.dim();
  const int L = s.half_side();
  CurvatureFit fit;
  fit.axis = axis;
  fit.expected = alpha / d;
  const int points = std::max(2, L / 2);
  const Momentum base = special_momentum(s, axis);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 1; k <= points; ++k) {
    std::array<int, kMaxDim> m{};
    for (int j = 0; j < d; ++j) m[j] = base.m(j);
    m[axis] = k;
    const Momentum p(s, std::span<const int>(m.data(), d));
    const double t = kPi * k / L;
    const double y = fk.shifted(p)(axis, axis) / (t * t);
    const double x = t * t;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = points;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.curvature = (sy - slope * sx) / n;
  fit.points = points;
  return fit;
}

Report spectral_checks(const FourierKernel& fk, const SpectrumTable& table, const ConstantsRecord& c,
                       double negative_tol, double bound_tol, double curvature_slack) {
  const LatticeSpec& s = fk.spec();
  const int d = s.dim();
  const double scale = table.scale;
  Report r("spectrum");

  {
    Stopwatch sw;
    const double rel = table.min_eigenvalue / scale;
    Check ch = make_check("w0_nonnegative", "nonnegativity of the shifted kernel", rel >= -negative_tol,
                          rel + negative_tol, negative_tol,
                          "min eigenvalue " + fmt(table.min_eigenvalue) + " at momentum index " +
                              std::to_string(table.min_momentum) + ", scale " + fmt(scale));
    ch.seconds = sw.seconds();
    r.add(ch);
  }
  {
    std::vector<std::size_t> expected;
    for (int l = 0; l < d; ++l) expected.push_back(special_momentum(s, l).index(s));
    std::sort(expected.begin(), expected.end());
    double nearest = HUGE_VAL;
    for (std::size_t m = 0; m < s.volume(); ++m)
      if (!std::binary_search(expected.begin(), expected.end(), m))
        nearest = std::min(nearest, std::abs(table.entries[m].eigenvalues.front()) / scale);
    const bool ok = table.zero_set == expected;
    std::string listed;
    for (std::size_t m : table.zero_set) {
      const Momentum p = Momentum::from_index(s, m);
      listed += "(";
      for (int j = 0; j < d; ++j) listed += (j ? "," : "") + std::to_string(p.m(j));
      listed += ")";
    }
    r.add(make_check("zero_set", "zero set is the special momenta", ok, nearest, 0.0,
                     "zero set m-indices " + listed + "; smallest |eigenvalue|/scale elsewhere " + fmt(nearest)));
  }
  {
    double worst = 0.0;
    for (int l = 0; l < d; ++l) {
      const auto& e = table.entries[special_momentum(s, l).index(s)];
      worst = std::max(worst, 1.0 - std::abs(e.eigenvectors[static_cast<std::size_t>(l)]));
    }
    r.add(make_check("zero_eigenvector_axis", "zero mode along its own axis", worst <= 1e-10, 1e-10 - worst, 1e-10));
  }
  r.add(make_check("eigenvector_orthonormality", "orthonormal eigenvectors", table.max_orthonormality_error <= 1e-12,
                   1e-12 - table.max_orthonormality_error, 1e-12));
  {
    double worst = HUGE_VAL;
    std::size_t at = 0;
    for (std::size_t m = 0; m < s.volume(); ++m)
      if (table.entries[m].bound_margin < worst) {
        worst = table.entries[m].bound_margin;
        at = m;
      }
    const double rel = worst / scale;
    r.add(make_check("quadratic_lower_bound", "W0(p) >= Y(p)", rel >= -bound_tol, rel + bound_tol, bound_tol,
                     "tightest margin " + fmt(worst) + " at momentum index " + std::to_string(at)));
  }
  {
    const double gap = c.e1.value - c.e0.value;
    double worst = 0.0;
    for (int m = 0; m < d; ++m) {
      const SmallMatrix w = fk.shifted(special_momentum(s, m));
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const double expect = (i == j && i != m) ? gap : 0.0;
          worst = std::max(worst, std::abs(w(i, j) - expect));
        }
    }
    const double rel = worst / scale;
    r.add(make_check("w0_at_special_momenta", "W0(pi_m) = (e1 - e0) off axis m", rel <= 1e-8, 1e-8 - rel, 1e-8));
    const double margin = (gap - (c.alpha.value + c.gamma.value) / d) / scale;
    r.add(make_check("gap_exceeds_constants", "e1 - e0 >= (alpha + gamma)/d", margin >= -1e-10, margin + 1e-10, 1e-10,
                     "e1 - e0 = " + fmt(gap) + ", (alpha + gamma)/d = " + fmt((c.alpha.value + c.gamma.value) / d)));
  }
  for (int l = 0; l < d; ++l) {
    Stopwatch sw;
    const CurvatureFit f = curvature_fit(fk, l, c.alpha.value);
    const double threshold = (1.0 - curvature_slack) * f.expected;
    Check ch = make_check("curvature_axis_" + std::to_string(l), "quadratic growth near the zero set",
                          f.curvature >= threshold, f.curvature / f.expected - (1.0 - curvature_slack), curvature_slack,
                          "fitted " + fmt(f.curvature) + " vs alpha/d " + fmt(f.expected) + " from " +
                              std::to_string(f.points) + " points");
    ch.seconds = sw.seconds();
    r.add(ch);
  }
  return r;
}

void write_spectrum_csv(const SpectrumTable& table, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  const int d = table.spec.dim();
  out << std::setprecision(17);
  for (int j = 0; j < d; ++j) out << "m" << j << ",";
  for (int j = 0; j < d; ++j) out << "lambda" << j << ",";
  out << "bound_margin\n";
  for (std::size_t m = 0; m < table.entries.size(); ++m) {
    const Momentum p = Momentum::from_index(table.spec, m);
    for (int j = 0; j < d; ++j) out << p.m(j) << ",";
    for (double v : table.entries[m].eigenvalues) out << v << ",";
    out << table.entries[m].bound_margin << "\n";
  }
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace dipole
