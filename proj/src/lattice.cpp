#include "dipole/lattice.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dipole/error.hpp"

namespace dipole {

namespace {

std::size_t checked_volume(int dim, int half_side) {
  std::size_t v = 1;
  for (int k = 0; k < dim; ++k) v *= static_cast<std::size_t>(2 * half_side);
  return v;
}

}  // namespace

LatticeSpec::LatticeSpec(int dim, int half_side, double epsilon, EpsilonPolicy policy)
    : dim_(dim), half_side_(half_side), epsilon_(epsilon), policy_(policy), volume_(0) {
  if (dim < 3 || dim > kMaxDim)
    fail(ErrorCode::invalid_argument,
         "dimension must be in [3, " + std::to_string(kMaxDim) + "], got " + std::to_string(dim));
  if (half_side < 2 || half_side % 2 != 0)
    fail(ErrorCode::invalid_argument,
         "half side L must be even and >= 2, got " + std::to_string(half_side));
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    fail(ErrorCode::invalid_argument, "infrared regulator epsilon must be positive");
  volume_ = checked_volume(dim, half_side);
}

LatticeSpec LatticeSpec::with_auto_epsilon(int dim, int half_side, double c) {
  if (!(c > 0.0))
    fail(ErrorCode::invalid_argument, "epsilon policy constant must be positive");
  return LatticeSpec(dim, half_side, c / static_cast<double>(half_side),
                     EpsilonPolicy{EpsilonPolicy::Kind::inverse_half_side, c});
}

LatticeSpec LatticeSpec::with_epsilon(int dim, int half_side, double epsilon) {
  return LatticeSpec(dim, half_side, epsilon,
                     EpsilonPolicy{EpsilonPolicy::Kind::explicit_value, epsilon});
}

int LatticeSpec::residue(long long x) const noexcept {
  const long long n = side();
  long long r = x % n;
  if (r < 0) r += n;
  return static_cast<int>(r);
}

int LatticeSpec::reduce(long long x) const noexcept {
  const int r = residue(x);
  return r > half_side_ ? r - side() : r;
}

bool LatticeSpec::operator==(const LatticeSpec& other) const noexcept {
  return dim_ == other.dim_ && half_side_ == other.half_side_ && epsilon_ == other.epsilon_;
}

Site::Site(const LatticeSpec& spec, std::span<const int> coords) : dim_(spec.dim()) {
  if (static_cast<int>(coords.size()) != spec.dim())
    fail(ErrorCode::invalid_argument, "site has wrong number of coordinates");
  for (int k = 0; k < dim_; ++k) x_[k] = spec.reduce(coords[k]);
}

Site::Site(const LatticeSpec& spec, std::initializer_list<int> coords)
    : Site(spec, std::span<const int>(coords.begin(), coords.size())) {}

Site Site::from_index(const LatticeSpec& spec, std::size_t index) {
  Site s;
  s.dim_ = spec.dim();
  const std::size_t n = static_cast<std::size_t>(spec.side());
  for (int k = spec.dim() - 1; k >= 0; --k) {
    s.x_[k] = spec.reduce(static_cast<long long>(index % n));
    index /= n;
  }
  return s;
}

std::size_t Site::index(const LatticeSpec& spec) const noexcept {
  std::size_t idx = 0;
  const std::size_t n = static_cast<std::size_t>(spec.side());
  for (int k = 0; k < dim_; ++k) idx = idx * n + static_cast<std::size_t>(spec.residue(x_[k]));
  return idx;
}

int Site::coordinate_sum() const noexcept {
  int s = 0;
  for (int k = 0; k < dim_; ++k) s += x_[k];
  return s;
}

Momentum::Momentum(const LatticeSpec& spec, std::span<const int> m) : dim_(spec.dim()) {
  if (static_cast<int>(m.size()) != spec.dim())
    fail(ErrorCode::invalid_argument, "momentum has wrong number of components");
  for (int k = 0; k < dim_; ++k) m_[k] = spec.residue(m[k]);
}

Momentum::Momentum(const LatticeSpec& spec, std::initializer_list<int> m)
    : Momentum(spec, std::span<const int>(m.begin(), m.size())) {}

Momentum Momentum::from_index(const LatticeSpec& spec, std::size_t index) {
  Momentum p;
  p.dim_ = spec.dim();
  const std::size_t n = static_cast<std::size_t>(spec.side());
  for (int k = spec.dim() - 1; k >= 0; --k) {
    p.m_[k] = static_cast<int>(index % n);
    index /= n;
  }
  return p;
}

double Momentum::component(int axis, int half_side) const noexcept {
  return std::numbers::pi * static_cast<double>(m_[axis]) / static_cast<double>(half_side);
}

std::size_t Momentum::index(const LatticeSpec& spec) const noexcept {
  std::size_t idx = 0;
  const std::size_t n = static_cast<std::size_t>(spec.side());
  for (int k = 0; k < dim_; ++k) idx = idx * n + static_cast<std::size_t>(m_[k]);
  return idx;
}

Momentum Momentum::shifted(const LatticeSpec& spec, const Momentum& q) const {
  std::array<int, kMaxDim> m{};
  for (int k = 0; k < dim_; ++k) m[k] = m_[k] + q.m_[k];
  return Momentum(spec, std::span<const int>(m.data(), static_cast<std::size_t>(dim_)));
}

Momentum special_momentum(const LatticeSpec& spec, int axis) {
  if (axis < 0 || axis >= spec.dim())
    fail(ErrorCode::invalid_argument, "axis out of range: " + std::to_string(axis));
  std::array<int, kMaxDim> m{};
  for (int k = 0; k < spec.dim(); ++k) m[k] = (k == axis) ? 0 : spec.half_side();
  return Momentum(spec, std::span<const int>(m.data(), static_cast<std::size_t>(spec.dim())));
}

int special_axis(const LatticeSpec& spec, const Momentum& p) noexcept {
  int axis = -1;
  for (int k = 0; k < spec.dim(); ++k) {
    if (p.m(k) == 0) {
      if (axis >= 0) return -1;
      axis = k;
    } else if (p.m(k) != spec.half_side()) {
      return -1;
    }
  }
  return axis;
}

int stagger_sign(const Site& x, int axis) {
  if (axis < 0 || axis >= x.dim())
    fail(ErrorCode::invalid_argument, "axis out of range: " + std::to_string(axis));
  const int e = x.coordinate_sum() + x[axis];
  return (e & 1) ? -1 : 1;
}

Period4 period4_from_name(std::string_view name) {
  if (name == "f0") return Period4::f0;
  if (name == "f1") return Period4::f1;
  if (name == "g0") return Period4::g0;
  if (name == "g1") return Period4::g1;
  fail(ErrorCode::invalid_argument, "unknown period-4 function: " + std::string(name));
}

int period4(Period4 fn, long long x) noexcept {
  static constexpr int table[4][4] = {
      {1, 1, -1, -1},   // f0
      {-1, 1, 1, -1},   // f1(x) = f0(x-1)
      {1, 0, -1, 0},    // g0
      {0, 1, 0, -1},    // g1(x) = g0(x-1)
  };
  long long r = x % 4;
  if (r < 0) r += 4;
  return table[static_cast<int>(fn)][r];
}

std::vector<Momentum> momentum_grid(const LatticeSpec& spec) {
  std::vector<Momentum> grid;
  grid.reserve(spec.volume());
  for (std::size_t i = 0; i < spec.volume(); ++i) grid.push_back(Momentum::from_index(spec, i));
  return grid;
}

}  // namespace dipole
