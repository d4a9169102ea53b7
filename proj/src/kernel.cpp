#include "dipole/kernel.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <string>

#include "dipole/error.hpp"
#include "dipole/yukawa.hpp"
#include "fft.hpp"

#include <zlib.h>

namespace dipole {

namespace {

using Tuple = std::array<int, kMaxDim>;

// Orbit representatives under signed axis permutations: 0 <= t_0 <= ... <= t_{d-1} <= L.
std::vector<Tuple> representatives(int d, int L) {
  std::vector<Tuple> reps;
  Tuple t{};
  auto rec = [&](auto&& self, int k, int lo) -> void {
    if (k == d) {
      reps.push_back(t);
      return;
    }
    for (int v = lo; v <= L; ++v) {
      t[k] = v;
      self(self, k + 1, v);
    }
  };
  rec(rec, 0, 0);
  return reps;
}

long long encode(const Tuple& t, int d, int L) {
  long long key = 0;
  for (int k = 0; k < d; ++k) key = key * (L + 1) + t[k];
  return key;
}

// Image sum of -d_i d_j Y over z = t + 2Ln with |z|_inf <= radius, z != 0.
SmallMatrix image_sum(const Tuple& t, int d, int L, int radius, const YukawaParams& yp) {
  std::array<int, kMaxDim> lo{}, hi{}, n{};
  const int period = 2 * L;
  for (int k = 0; k < d; ++k) {
    // smallest n with t + period*n >= -radius, largest with <= radius
    lo[k] = static_cast<int>(std::ceil(static_cast<double>(-radius - t[k]) / period));
    hi[k] = static_cast<int>(std::floor(static_cast<double>(radius - t[k]) / period));
    n[k] = lo[k];
  }
  long double trace_part = 0.0L;
  std::array<long double, kMaxDim * kMaxDim> outer{};
  std::array<double, kMaxDim> z{};
  const bool d3 = (d == 3);
  const double eps = yp.epsilon;
  constexpr double inv4pi = 1.0 / (4.0 * 3.14159265358979323846);
  for (;;) {
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      z[k] = static_cast<double>(t[k] + period * n[k]);
      r2 += z[k] * z[k];
    }
    if (r2 > 0.0) {
      const double r = std::sqrt(r2);
      double a, b;
      if (d3) {
        const double er = eps * r;
        const double pref = std::exp(-er) * inv4pi / (r2 * r);
        a = -pref * (1.0 + er);
        b = pref * (3.0 + er * (3.0 + er));
      } else {
        const RadialParts p = yukawa_radial_parts(r, yp);
        a = p.a;
        b = p.b;
      }
      trace_part += a;
      const double br2 = b / r2;
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) outer[i * kMaxDim + j] += br2 * z[i] * z[j];
    }
    int k = d - 1;
    while (k >= 0 && n[k] == hi[k]) {
      n[k] = lo[k];
      --k;
    }
    if (k < 0) break;
    ++n[k];
  }
  SmallMatrix w(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const long double v = outer[i * kMaxDim + j] + (i == j ? trace_part : 0.0L);
      w(i, j) = -static_cast<double>(v);
      w(j, i) = w(i, j);
    }
  return w;
}

// Imposes the exact symmetries of the representative: entries odd in a
// coordinate that sits at 0 or L vanish, and axes with equal |t| are
// interchangeable.
void symmetrize_representative(SmallMatrix& w, const Tuple& t, int d, int L) {
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j && (t[i] == 0 || t[i] == L || t[j] == 0 || t[j] == L)) w(i, j) = 0.0;

  std::array<int, kMaxDim> perm{};
  std::iota(perm.begin(), perm.begin() + d, 0);
  SmallMatrix acc(d);
  int count = 0;
  do {
    bool stabilizes = true;
    for (int k = 0; k < d; ++k)
      if (t[perm[k]] != t[k]) {
        stabilizes = false;
        break;
      }
    if (!stabilizes) continue;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) acc(i, j) += w(perm[i], perm[j]);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.begin() + d));
  acc *= 1.0 / count;
  w = acc;
}

}  // namespace

KernelTable::KernelTable(LatticeSpec spec, int image_cutoff, double truncation_bound, std::vector<double> data)
    : spec_(spec), image_cutoff_(image_cutoff), truncation_bound_(truncation_bound), data_(std::move(data)) {
  const std::size_t d = static_cast<std::size_t>(spec_.dim());
  if (data_.size() != spec_.volume() * d * d)
    fail(ErrorCode::invalid_argument, "kernel table size does not match lattice");
}

SmallMatrix KernelTable::at(std::size_t site) const {
  const int d = spec_.dim();
  SmallMatrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = entry(site, i, j);
  return m;
}

double image_tail_bound(const LatticeSpec& spec, int radius) {
  const YukawaParams yp{spec.epsilon(), spec.dim()};
  const double L = spec.half_side();
  const double d = spec.dim();
  const double eps = spec.epsilon();
  const double R = radius;
  // Points of x + 2L Z^d with |z|_inf <= rho number at most (rho/L + 1)^d and
  // at least (rho/L - 1)^d, which bounds the population of each shell.
  auto upper = [&](double rho) { return std::pow(rho / L + 1.0, d); };
  auto lower = [&](double rho) { return std::pow(std::max(0.0, rho / L - 1.0), d); };
  double sum = 0.0;
  for (int k = 1; k < 1000000; ++k) {
    const double inner = R + 2.0 * L * (k - 1);
    const double outer = R + 2.0 * L * k;
    const double shell = upper(outer) - lower(inner);
    const double term = shell * hessian_entry_envelope(inner, yp) * std::exp(-eps * inner);
    // The shell population is a degree d-1 polynomial in inner/L with
    // non-negative coefficients, so later terms shrink at least by this factor.
    const double ratio_log = -2.0 * L * eps + (d - 1.0) * std::log1p(2.0 * L / inner);
    if (ratio_log < 0.0 && inner >= L) {
      const double remainder = term / (1.0 - std::exp(ratio_log));
      if (remainder <= 1e-3 * sum || remainder < 1e-300) return sum + remainder;
    }
    sum += term;
  }
  fail(ErrorCode::numerical, "image tail bound did not converge");
}

KernelTable build_kernel(const LatticeSpec& spec, const KernelBuildOptions& options) {
  if (!(options.tol > 0.0)) fail(ErrorCode::invalid_argument, "kernel tolerance must be positive");
  const int d = spec.dim();
  const int L = spec.half_side();
  const YukawaParams yp{spec.epsilon(), d};

  int radius = std::max(L, options.min_cutoff);
  double bound = image_tail_bound(spec, radius);
  const int max_radius = L * options.max_radius_in_L;
  while (bound > options.tol) {
    if (radius + L > max_radius)
      fail(ErrorCode::numerical, "kernel tolerance " + std::to_string(options.tol) +
                                     " unreachable within image budget; achieved bound " +
                                     std::to_string(bound) + " at cutoff " + std::to_string(radius));
    radius += L;
    bound = image_tail_bound(spec, radius);
  }

  const std::vector<Tuple> reps = representatives(d, L);
  std::vector<SmallMatrix> rep_values(reps.size());
  parallel_for(reps.size(), options.threads, [&](std::size_t r) {
    SmallMatrix w = image_sum(reps[r], d, L, radius, yp);
    symmetrize_representative(w, reps[r], d, L);
    rep_values[r] = w;
  });
  std::map<long long, std::size_t> rep_index;
  for (std::size_t r = 0; r < reps.size(); ++r) rep_index.emplace(encode(reps[r], d, L), r);

  const std::size_t N = spec.volume();
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  std::vector<double> data(N * dd);
  for (std::size_t s = 0; s < N; ++s) {
    const Site x = Site::from_index(spec, s);
    std::array<int, kMaxDim> order{};
    std::iota(order.begin(), order.begin() + d, 0);
    std::stable_sort(order.begin(), order.begin() + d,
                     [&](int a, int b) { return std::abs(x[a]) < std::abs(x[b]); });
    Tuple t{};
    std::array<int, kMaxDim> pos{};
    for (int m = 0; m < d; ++m) {
      t[m] = std::abs(x[order[m]]);
      pos[order[m]] = m;
    }
    const SmallMatrix& w = rep_values[rep_index.at(encode(t, d, L))];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double sign = ((x[i] < 0) != (x[j] < 0)) ? -1.0 : 1.0;
        data[s * dd + static_cast<std::size_t>(i) * d + j] = sign * w(pos[i], pos[j]);
      }
  }
  return KernelTable(spec, radius, bound, std::move(data));
}

namespace {

constexpr char kMagic[5] = {'D', 'I', 'P', 'W', '1'};

template <class T>
void put_le(std::string& buf, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  buf.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) fail(ErrorCode::corrupt, "kernel cache truncated");
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, buf.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::uint32_t crc_of(const std::string& buf, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* p = reinterpret_cast<const Bytef*>(buf.data());
  std::size_t done = 0;
  while (done < n) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(n - done, 1u << 30));
    crc = crc32(crc, p + done, chunk);
    done += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void save_kernel(const KernelTable& table, const std::filesystem::path& path) {
  std::string buf(kMagic, sizeof(kMagic));
  put_le<std::int32_t>(buf, table.spec().dim());
  put_le<std::int32_t>(buf, table.spec().half_side());
  put_le<double>(buf, table.spec().epsilon());
  put_le<std::int32_t>(buf, table.image_cutoff());
  for (double v : table.data()) put_le<double>(buf, v);
  put_le<std::uint32_t>(buf, crc_of(buf, buf.size()));

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write kernel cache " + tmp.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) fail(ErrorCode::io, "write failed for kernel cache " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

KernelTable load_kernel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::not_found, "kernel cache not found: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kMagic) + 4 || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
    fail(ErrorCode::corrupt, "not a kernel cache: " + path.string());
  const std::size_t body = buf.size() - 4;
  std::size_t tail = body;
  const std::uint32_t stored = get_le<std::uint32_t>(buf, tail);
  if (stored != crc_of(buf, body)) fail(ErrorCode::corrupt, "kernel cache checksum mismatch: " + path.string());
  std::size_t pos = sizeof(kMagic);
  const int d = get_le<std::int32_t>(buf, pos);
  const int L = get_le<std::int32_t>(buf, pos);
  const double eps = get_le<double>(buf, pos);
  const int cutoff = get_le<std::int32_t>(buf, pos);
  const LatticeSpec spec = LatticeSpec::with_epsilon(d, L, eps);
  const std::size_t count = spec.volume() * static_cast<std::size_t>(d) * d;
  if (pos + count * 8 != body) fail(ErrorCode::corrupt, "kernel cache has wrong payload size");
  std::vector<double> data(count);
  for (auto& v : data) v = get_le<double>(buf, pos);
  return KernelTable(spec, cutoff, image_tail_bound(spec, cutoff), std::move(data));
}

FourierKernel::FourierKernel(LatticeSpec spec, std::vector<double> data, double e0, double e0_fourier,
                             double max_imag)
    : spec_(spec), data_(std::move(data)), e0_(e0), e0_fourier_(e0_fourier), max_imag_(max_imag) {}

SmallMatrix FourierKernel::at(std::size_t momentum) const {
  const int d = spec_.dim();
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  SmallMatrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = data_[momentum * dd + static_cast<std::size_t>(i) * d + j];
  return m;
}

SmallMatrix FourierKernel::shifted(std::size_t momentum) const {
  SmallMatrix m = at(momentum);
  for (int i = 0; i < m.size(); ++i) m(i, i) -= e0_;
  return m;
}

FourierKernel fourier_kernel(const KernelTable& table, double imag_tol, double e0_rel_tol) {
  const LatticeSpec& spec = table.spec();
  const int d = spec.dim();
  const std::size_t N = spec.volume();
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  detail::FftPlan plan(d, spec.side());
  std::vector<std::complex<double>> in(N), out(N);
  std::vector<double> data(N * dd);
  double max_entry = 0.0;
  for (double v : table.data()) max_entry = std::max(max_entry, std::abs(v));
  double max_imag = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      for (std::size_t s = 0; s < N; ++s) in[s] = table.entry(s, i, j);
      plan.backward(in, out);
      for (std::size_t m = 0; m < N; ++m) {
        max_imag = std::max(max_imag, std::abs(out[m].imag()));
        data[m * dd + static_cast<std::size_t>(i) * d + j] = out[m].real();
        data[m * dd + static_cast<std::size_t>(j) * d + i] = out[m].real();
      }
    }
  if (max_imag > imag_tol * std::max(max_entry, 1e-300))
    fail(ErrorCode::numerical, "Fourier kernel has imaginary residual " + std::to_string(max_imag) +
                                   " (kernel parity broken)");

  double e0 = 0.0;
  for (std::size_t s = 0; s < N; ++s) {
    const Site x = Site::from_index(spec, s);
    e0 += stagger_sign(x, 0) * table.entry(s, 0, 0);
  }
  const std::size_t pi0 = special_momentum(spec, 0).index(spec);
  const double e0f = data[pi0 * dd];
  if (std::abs(e0 - e0f) > e0_rel_tol * std::abs(e0))
    fail(ErrorCode::numerical, "e0 mismatch: real-space " + std::to_string(e0) + " vs Fourier " +
                                   std::to_string(e0f));
  return FourierKernel(spec, std::move(data), e0, e0f, max_imag);
}

SmallMatrix direct_fourier_entry(const KernelTable& table, const Momentum& p, double* max_imag) {
  const LatticeSpec& spec = table.spec();
  const int d = spec.dim();
  SmallMatrix re(d);
  SmallMatrix im(d);
  for (std::size_t s = 0; s < spec.volume(); ++s) {
    const Site x = Site::from_index(spec, s);
    double phase = 0.0;
    for (int k = 0; k < d; ++k) phase += p.component(k, spec.half_side()) * x[k];
    const double c = std::cos(phase);
    const double sn = std::sin(phase);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        re(i, j) += c * table.entry(s, i, j);
        im(i, j) += sn * table.entry(s, i, j);
      }
  }
  if (max_imag) *max_imag = im.max_abs();
  return re;
}

}  // namespace dipole
