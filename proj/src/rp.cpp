#include "dipole/rp.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "dipole/error.hpp"
#include "dipole/linalg.hpp"
#include "dipole/random.hpp"
#include "fft.hpp"

namespace dipole {

namespace {

int mod(int a, int m) {
  const int r = a % m;
  return r < 0 ? r + m : r;
}

// Residues of every site along every axis, and the storage stride per axis.
struct Geometry {
  int d;
  int side;
  std::size_t n;
  std::vector<int> residues;
  std::array<std::size_t, kMaxDim> stride{};

  explicit Geometry(const LatticeSpec& s) : d(s.dim()), side(s.side()), n(s.volume()), residues(n * d) {
    std::size_t st = 1;
    for (int k = d - 1; k >= 0; --k) {
      stride[k] = st;
      st *= static_cast<std::size_t>(side);
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t rem = i;
      for (int k = 0; k < d; ++k) {
        residues[i * d + k] = static_cast<int>(rem / stride[k]);
        rem %= stride[k];
      }
    }
  }

  std::size_t difference(std::size_t x, std::size_t y) const {
    std::size_t idx = 0;
    for (int k = 0; k < d; ++k) idx += static_cast<std::size_t>(mod(residues[x * d + k] - residues[y * d + k], side)) * stride[k];
    return idx;
  }
};

int plane_period(const LatticeSpec& s, const ReflectionPlane& p) {
  const int period = p.period == 0 ? s.side() : p.period;
  if (p.axis < 0 || p.axis >= s.dim()) fail(ErrorCode::invalid_argument, "reflection axis out of range");
  if (period < 2 || period % 2 != 0 || s.side() % period != 0)
    fail(ErrorCode::invalid_argument, "reflection period must be even and divide the side");
  return period;
}

void check_spec(const LatticeSpec& a, const LatticeSpec& b) {
  if (!(a == b)) fail(ErrorCode::invalid_argument, "configuration and kernel describe different lattices");
}

double stagger(const Geometry& g, std::size_t x, int axis) {
  int sum = 0;
  for (int k = 0; k < g.d; ++k) sum += g.residues[x * g.d + k];
  return ((sum + g.residues[x * g.d + axis]) % 2 == 0) ? 1.0 : -1.0;
}

}  // namespace

SpinConfig::SpinConfig(LatticeSpec spec, Gauge gauge, std::vector<double> spins)
    : spec_(spec), gauge_(gauge), spins_(std::move(spins)) {
  const std::size_t d = static_cast<std::size_t>(spec_.dim());
  if (spins_.size() != spec_.volume() * d) fail(ErrorCode::invalid_argument, "spin array has wrong size");
  for (std::size_t x = 0; x < spec_.volume(); ++x) {
    double n2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) n2 += spins_[x * d + i] * spins_[x * d + i];
    if (!(std::abs(std::sqrt(n2) - 1.0) <= 1e-12))
      fail(ErrorCode::invalid_argument, "spin at site " + std::to_string(x) + " is not a unit vector");
  }
}

SpinConfig SpinConfig::uniform(const LatticeSpec& spec, Gauge gauge, std::span<const double> v) {
  if (static_cast<int>(v.size()) != spec.dim()) fail(ErrorCode::invalid_argument, "direction has wrong dimension");
  std::vector<double> s;
  s.reserve(spec.volume() * v.size());
  for (std::size_t x = 0; x < spec.volume(); ++x) s.insert(s.end(), v.begin(), v.end());
  return SpinConfig(spec, gauge, std::move(s));
}

SpinConfig SpinConfig::random(const LatticeSpec& spec, Gauge gauge, std::mt19937_64& rng) {
  const std::size_t d = static_cast<std::size_t>(spec.dim());
  std::vector<double> s(spec.volume() * d);
  for (std::size_t x = 0; x < spec.volume(); ++x) random_unit_vector(rng, std::span<double>(s.data() + x * d, d));
  return SpinConfig(spec, gauge, std::move(s));
}

SpinConfig SpinConfig::to_original() const {
  if (gauge_ == Gauge::original) return *this;
  const Geometry g(spec_);
  std::vector<double> s = spins_;
  for (std::size_t x = 0; x < g.n; ++x)
    for (int i = 0; i < g.d; ++i) s[x * g.d + i] *= stagger(g, x, i);
  return SpinConfig(spec_, Gauge::original, std::move(s));
}

SpinConfig SpinConfig::to_staggered() const {
  if (gauge_ == Gauge::staggered) return *this;
  const Geometry g(spec_);
  std::vector<double> s = spins_;
  for (std::size_t x = 0; x < g.n; ++x)
    for (int i = 0; i < g.d; ++i) s[x * g.d + i] *= stagger(g, x, i);
  return SpinConfig(spec_, Gauge::staggered, std::move(s));
}

std::size_t reflect_site(const LatticeSpec& spec, const ReflectionPlane& plane, std::size_t site) {
  const int period = plane_period(spec, plane);
  Site x = Site::from_index(spec, site);
  std::array<int, kMaxDim> c{};
  for (int k = 0; k < spec.dim(); ++k) c[k] = spec.residue(x[k]);
  const int u = c[plane.axis];
  const int base = u - u % period;
  c[plane.axis] = base + mod(2 * plane.offset + 1 - u % period, period);
  return Site(spec, std::span<const int>(c.data(), spec.dim())).index(spec);
}

bool in_positive_half(const LatticeSpec& spec, const ReflectionPlane& plane, std::size_t site) {
  const int period = plane_period(spec, plane);
  const int u = spec.residue(Site::from_index(spec, site)[plane.axis]);
  return mod(u - plane.offset - 1, period) < period / 2;
}

std::vector<ReflectionPlane> all_planes(const LatticeSpec& spec) {
  std::vector<ReflectionPlane> planes;
  for (int a = 0; a < spec.dim(); ++a)
    for (int c = 0; c < spec.half_side(); ++c) planes.push_back({a, c, 0});
  return planes;
}

SpinConfig reflect(const SpinConfig& config, const ReflectionPlane& plane) {
  const LatticeSpec& s = config.spec();
  const int d = s.dim();
  std::vector<double> out(config.data().size());
  for (std::size_t x = 0; x < s.volume(); ++x) {
    const std::size_t rx = reflect_site(s, plane, x);
    const auto src = config.spin(x);
    for (int i = 0; i < d; ++i) {
      const double sign = (config.gauge() == Gauge::original && i != plane.axis) ? -1.0 : 1.0;
      out[rx * d + i] = sign * src[i];
    }
  }
  return SpinConfig(s, config.gauge(), std::move(out));
}

namespace {

double energy_direct(const SpinConfig& c, const KernelTable& t) {
  const Geometry g(c.spec());
  const int d = g.d;
  const auto w = t.data();
  const auto sp = c.data();
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  long double total = 0.0L;
  for (std::size_t x = 0; x < g.n; ++x) {
    double row = 0.0;
    for (std::size_t y = 0; y < g.n; ++y) {
      const double* wz = w.data() + g.difference(x, y) * dd;
      for (int i = 0; i < d; ++i) {
        double f = 0.0;
        for (int j = 0; j < d; ++j) f += wz[i * d + j] * sp[y * d + j];
        row += sp[x * d + i] * f;
      }
    }
    total += row;
  }
  return static_cast<double>(total);
}

}  // namespace

double energy(const SpinConfig& config, const KernelTable& table) {
  check_spec(config.spec(), table.spec());
  const SpinConfig c = config.to_original();
  if (c.spec().volume() <= 4096) return energy_direct(c, table);
  return energy_fft(c, fourier_kernel(table));
}

double energy_fft(const SpinConfig& config, const FourierKernel& fk) {
  check_spec(config.spec(), fk.spec());
  const SpinConfig c = config.to_original();
  const LatticeSpec& s = c.spec();
  const int d = s.dim();
  const std::size_t n = s.volume();
  detail::FftPlan plan(d, s.side());
  std::vector<std::vector<std::complex<double>>> hat(d, std::vector<std::complex<double>>(n));
  std::vector<std::complex<double>> in(n);
  for (int i = 0; i < d; ++i) {
    for (std::size_t x = 0; x < n; ++x) in[x] = c.spin(x)[i];
    plan.backward(in, hat[i]);
  }
  long double total = 0.0L;
  for (std::size_t m = 0; m < n; ++m) {
    const SmallMatrix w = fk.at(m);
    double v = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) v += w(i, j) * (std::conj(hat[i][m]) * hat[j][m]).real();
    total += v;
  }
  return static_cast<double>(total / n);
}

double energy_primed(const SpinConfig& config, const KernelTable& table, double e0) {
  check_spec(config.spec(), table.spec());
  const SpinConfig c = config.to_staggered();
  const Geometry g(c.spec());
  const int d = g.d;
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  const auto w = table.data();
  std::vector<double> sign(g.n * d);
  for (std::size_t x = 0; x < g.n; ++x)
    for (int i = 0; i < d; ++i) sign[x * d + i] = stagger(g, x, i);
  long double total = 0.0L;
  std::array<double, kMaxDim> diff{};
  for (std::size_t x = 0; x < g.n; ++x) {
    double row = 0.0;
    const auto sx = c.spin(x);
    for (std::size_t y = 0; y < g.n; ++y) {
      const auto sy = c.spin(y);
      for (int i = 0; i < d; ++i) diff[i] = sx[i] - sy[i];
      const double* wz = w.data() + g.difference(x, y) * dd;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) row += diff[i] * sign[x * d + i] * wz[i * d + j] * sign[y * d + j] * diff[j];
    }
    total += row;
  }
  return static_cast<double>(-0.5L * total) + e0 * static_cast<double>(g.n);
}

double primed_row_sum_deviation(const KernelTable& table, double e0) {
  const Geometry g(table.spec());
  const int d = g.d;
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  const auto w = table.data();
  double worst = 0.0;
  for (std::size_t x = 0; x < g.n; ++x) {
    std::array<long double, kMaxDim * kMaxDim> acc{};
    for (std::size_t y = 0; y < g.n; ++y) {
      const double* wz = w.data() + g.difference(x, y) * dd;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) acc[i * d + j] += stagger(g, x, i) * stagger(g, y, j) * wz[i * d + j];
    }
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        worst = std::max(worst, std::abs(static_cast<double>(acc[i * d + j]) - (i == j ? e0 : 0.0)));
  }
  return worst;
}

SpinConfig ground_state(const LatticeSpec& spec, std::span<const double> v, const Site& x0) {
  const int d = spec.dim();
  if (static_cast<int>(v.size()) != d) fail(ErrorCode::invalid_argument, "direction has wrong dimension");
  double n2 = 0.0;
  for (double c : v) n2 += c * c;
  if (!(std::abs(std::sqrt(n2) - 1.0) <= 1e-12)) fail(ErrorCode::invalid_argument, "direction must be a unit vector");
  std::vector<double> s(spec.volume() * d);
  for (std::size_t k = 0; k < spec.volume(); ++k) {
    const Site x = Site::from_index(spec, k);
    for (int i = 0; i < d; ++i) s[k * d + i] = stagger_sign(x, i) * stagger_sign(x0, i) * v[i];
  }
  return SpinConfig(spec, Gauge::original, std::move(s));
}

CrossOperator cross_operator(const KernelTable& table, const ReflectionPlane& plane) {
  const LatticeSpec& s = table.spec();
  const Geometry g(s);
  const int d = g.d;
  CrossOperator op;
  op.dim = d;
  for (std::size_t x = 0; x < g.n; ++x)
    if (in_positive_half(s, plane, x)) op.sites.push_back(x);
  const std::size_t m = op.sites.size() * d;
  op.matrix.assign(m * m, 0.0);
  for (std::size_t a = 0; a < op.sites.size(); ++a)
    for (std::size_t b = 0; b < op.sites.size(); ++b) {
      const std::size_t rb = reflect_site(s, plane, op.sites[b]);
      const std::size_t z = g.difference(op.sites[a], rb);
      for (int l = 0; l < d; ++l)
        for (int k = 0; k < d; ++k) {
          const double r = (k == plane.axis) ? 1.0 : -1.0;
          op.matrix[(a * d + l) * m + b * d + k] = -table.entry(z, l, k) * r;
        }
    }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double u = op.matrix[i * m + j], v = op.matrix[j * m + i];
      op.max_asymmetry = std::max(op.max_asymmetry, std::abs(u - v));
      op.matrix[i * m + j] = op.matrix[j * m + i] = 0.5 * (u + v);
    }
  return op;
}

double rp_cross_form(const KernelTable& table, const ReflectionPlane& plane, std::span<const double> rho) {
  const CrossOperator op = cross_operator(table, plane);
  const std::size_t m = op.sites.size() * op.dim;
  if (rho.size() != m) fail(ErrorCode::invalid_argument, "field must have one vector per positive-half site");
  long double total = 0.0L;
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) row += op.matrix[i * m + j] * rho[j];
    total += rho[i] * row;
  }
  return static_cast<double>(total);
}

namespace {

SpinConfig reflected_half(const SpinConfig& c, const ReflectionPlane& plane, bool keep_positive) {
  const LatticeSpec& s = c.spec();
  const int d = s.dim();
  std::vector<double> out(c.data().begin(), c.data().end());
  for (std::size_t x = 0; x < s.volume(); ++x) {
    if (in_positive_half(s, plane, x) == keep_positive) continue;
    const std::size_t rx = reflect_site(s, plane, x);
    const auto src = c.spin(rx);
    for (int i = 0; i < d; ++i) {
      const double sign = (c.gauge() == Gauge::original && i != plane.axis) ? -1.0 : 1.0;
      out[x * d + i] = sign * src[i];
    }
  }
  return SpinConfig(s, c.gauge(), std::move(out));
}

}  // namespace

ChessboardEnergies chessboard_step(const SpinConfig& config, const ReflectionPlane& plane, const KernelTable& table) {
  SpinConfig a = reflected_half(config, plane, true);
  SpinConfig b = reflected_half(config, plane, false);
  const double ea = energy(a, table);
  const double eb = energy(b, table);
  return ChessboardEnergies{energy(config, table), ea, eb, std::move(a), std::move(b)};
}

std::vector<double> chessboard_descent(const SpinConfig& config, const KernelTable& table) {
  const LatticeSpec& s = config.spec();
  std::vector<ReflectionPlane> sequence;
  for (int axis = 0; axis < s.dim(); ++axis) {
    sequence.push_back({axis, 0, s.side()});
    for (int period = s.side(); period >= 4; period /= 2) sequence.push_back({axis, period / 4, period});
  }
  SpinConfig current = config;
  std::vector<double> energies{energy(current, table)};
  for (const auto& plane : sequence) {
    ChessboardEnergies e = chessboard_step(current, plane, table);
    current = e.positive <= e.negative ? std::move(e.positive_config) : std::move(e.negative_config);
    energies.push_back(std::min(e.positive, e.negative));
  }
  return energies;
}

}  // namespace dipole
