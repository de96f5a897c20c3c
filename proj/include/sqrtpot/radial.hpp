// Physical layer: maps (alpha, l, k) to the Heun parameter family and
// assembles the radial solutions u_l(r) of
//   u'' + [k^2 - l(l+1)/r^2 + alpha/sqrt(r)] u = 0   (hbar = 2m = 1, E = k^2)
// via the substitution z = sqrt(-2ik r).
#pragma once

#include <functional>

#include "sqrtpot/heun.hpp"
#include "sqrtpot/numerics.hpp"

namespace sqrtpot {

/// Physical configuration. k must lie on the positive real axis (scattering)
/// or the positive imaginary axis (bound states, k = i kappa).
struct PhysicalConfig {
  double alpha = 1.0;  ///< coupling of V(r) = -alpha/sqrt(r); alpha >= 0
  int l = 0;           ///< angular momentum, l >= 0
  Complex k{1.0, 0.0}; ///< wavenumber

  bool is_bound() const { return k.real() == 0.0 && k.imag() > 0.0; }
  double kappa() const { return k.imag(); }
};

struct RadialPoint {
  double r = 0.0;
  Complex u{};
  Complex du_dr{};
};

/// Validates cfg and returns the Heun family parameters (4l+2, 2*lambda,
/// lambda^2, 0), the branch parameter lambda = alpha/sqrt(2 i k^3) resolved
/// per the ray rules (lambda = -alpha/sqrt(2 kappa^3) real on the bound ray,
/// alpha e^{-i pi/4}/sqrt(2 k^3) on the scattering ray), and the principal
/// branch map r -> z = sqrt(-2 i k r).
struct ParamMap {
  HeunParams params;
  Complex lambda;
  std::function<Complex(double)> z_of_r;
  Complex ray;         ///< unit vector z/|z| (1 on the bound ray, e^{-i pi/4} scattering)
};
ParamMap map_params(const PhysicalConfig& cfg);

/// Regular solution u_l(r) = A_l (-2ikr)^{l+1} e^{i(kr + (alpha/k) sqrt r)}
/// N(4l+2, 2 lambda, lambda^2, 0, z(r)) with A_l = (-2ik)^{-(l+1)}, so that
/// u_l(r)/r^{l+1} -> 1 as r -> 0. Throws when z(r) leaves the series domain.
RadialPoint regular_u(const PhysicalConfig& cfg, double r, double tol);

/// The pure asymptotic phase factor
///   exp(sign * i * (kr + (alpha/k) sqrt r - (alpha^2/(8k^3)) ln r)),
/// principal logarithm. Real k only.
Complex asymptotic_u_infinity(const PhysicalConfig& cfg, int sign, double r);

}  // namespace sqrtpot
