#pragma once

// Periodic box geometry: sites, momenta, staggering signs and the period-4
// sign functions used by the reflection constructions.
//
// Axes are 0-based throughout the C++ interface (axis 0 is the first
// coordinate direction). Site coordinates live in [-L+1, L]; any integer
// vector is accepted and reduced modulo 2L.

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace dipole {

inline constexpr int kMaxDim = 6;

struct EpsilonPolicy {
  enum class Kind { explicit_value, inverse_half_side };
  Kind kind = Kind::inverse_half_side;
  // explicit_value: the regulator itself. inverse_half_side: constant c with
  // epsilon = c / L.
  double value = 0.5;
};

class LatticeSpec {
 public:
  // epsilon = c / L (default c = 1/2, i.e. epsilon = 1/(2L)).
  static LatticeSpec with_auto_epsilon(int dim, int half_side, double c = 0.5);
  static LatticeSpec with_epsilon(int dim, int half_side, double epsilon);

  int dim() const noexcept { return dim_; }
  int half_side() const noexcept { return half_side_; }
  int side() const noexcept { return 2 * half_side_; }
  std::size_t volume() const noexcept { return volume_; }
  double epsilon() const noexcept { return epsilon_; }
  const EpsilonPolicy& policy() const noexcept { return policy_; }

  // Canonical representative of x in [-L+1, L].
  int reduce(long long x) const noexcept;
  // Residue of x in [0, 2L); this is the per-axis storage index.
  int residue(long long x) const noexcept;

  bool operator==(const LatticeSpec& other) const noexcept;

 private:
  LatticeSpec(int dim, int half_side, double epsilon, EpsilonPolicy policy);

  int dim_;
  int half_side_;
  double epsilon_;
  EpsilonPolicy policy_;
  std::size_t volume_;
};

class Site {
 public:
  Site() = default;
  Site(const LatticeSpec& spec, std::span<const int> coords);
  Site(const LatticeSpec& spec, std::initializer_list<int> coords);
  // Site with the given row-major storage index.
  static Site from_index(const LatticeSpec& spec, std::size_t index);

  int dim() const noexcept { return dim_; }
  int operator[](int axis) const noexcept { return x_[axis]; }
  std::span<const int> coords() const noexcept { return {x_.data(), static_cast<std::size_t>(dim_)}; }
  std::size_t index(const LatticeSpec& spec) const noexcept;
  int coordinate_sum() const noexcept;

  bool operator==(const Site& other) const noexcept = default;

 private:
  int dim_ = 0;
  std::array<int, kMaxDim> x_{};
};

// Momentum p with components pi * m_k / L, 0 <= m_k < 2L; stored as the
// integers m_k.
class Momentum {
 public:
  Momentum() = default;
  Momentum(const LatticeSpec& spec, std::span<const int> m);
  Momentum(const LatticeSpec& spec, std::initializer_list<int> m);
  static Momentum from_index(const LatticeSpec& spec, std::size_t index);

  int dim() const noexcept { return dim_; }
  int m(int axis) const noexcept { return m_[axis]; }
  std::span<const int> indices() const noexcept { return {m_.data(), static_cast<std::size_t>(dim_)}; }
  double component(int axis, int half_side) const noexcept;
  std::size_t index(const LatticeSpec& spec) const noexcept;
  // p + q reduced onto the grid.
  Momentum shifted(const LatticeSpec& spec, const Momentum& q) const;

  bool operator==(const Momentum& other) const noexcept = default;

 private:
  int dim_ = 0;
  std::array<int, kMaxDim> m_{};
};

// The momentum with component `axis` equal to 0 and all others equal to pi.
Momentum special_momentum(const LatticeSpec& spec, int axis);
// Returns the axis if p is one of the special momenta, otherwise -1.
int special_axis(const LatticeSpec& spec, const Momentum& p) noexcept;

// (-1)^(x_1 + ... + x_d + x_axis).
int stagger_sign(const Site& x, int axis);

enum class Period4 { f0, f1, g0, g1 };

Period4 period4_from_name(std::string_view name);
int period4(Period4 fn, long long x) noexcept;

// All (2L)^d momenta in storage order (lexicographic in m).
std::vector<Momentum> momentum_grid(const LatticeSpec& spec);

}  // namespace dipole
