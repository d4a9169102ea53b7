#pragma once

// Screened Coulomb (Yukawa) potential Y(x) = \int dk/(2pi)^d e^{ikx}/(k^2+eps^2)
// and the dipole tensor -d_i d_j Y.

#include <span>

#include "dipole/linalg.hpp"

namespace dipole {

struct YukawaParams {
  double epsilon = 1.0;
  int dim = 3;
};

// Y at x != 0. d = 3 uses e^{-eps r}/(4 pi r); other d use the modified
// Bessel function form.
double yukawa_value(std::span<const double> x, const YukawaParams& params);

// -d_i d_j Y from the elementary d = 3 closed form. Throws for x = 0 or d != 3.
SmallMatrix yukawa_hessian_d3(std::span<const double> x, const YukawaParams& params);

// -d_i d_j Y from the closed form for any d >= 3 (d = 3 dispatches to the
// elementary form above).
SmallMatrix yukawa_hessian(std::span<const double> x, const YukawaParams& params);

struct SlabOptions {
  double rel_tol = 1e-13;
  int max_depth = 15;
};

struct SlabHessian {
  SmallMatrix value;
  double error_estimate = 0.0;
};

// -d_i d_j Y from the transverse-momentum (slab) representation along the
// axis of largest |x_a|, with the (d-1)-dimensional integral reduced to
// radial Hankel integrals evaluated by adaptive Gauss-Kronrod quadrature.
// Throws ErrorCode::numerical if the requested accuracy is not reached.
SlabHessian yukawa_hessian_slab(std::span<const double> x, const YukawaParams& params,
                                const SlabOptions& options = {});

// Radial decomposition d_i d_j Y = a(r) delta_ij + b(r) xhat_i xhat_j.
struct RadialParts {
  double a = 0.0;
  double b = 0.0;
};
RadialParts yukawa_radial_parts(double r, const YukawaParams& params);

// h(r) such that every entry of -d_i d_j Y at distance r is bounded by
// h(r) e^{-eps r}; h is non-increasing in r.
double hessian_entry_envelope(double r, const YukawaParams& params);

}  // namespace dipole
