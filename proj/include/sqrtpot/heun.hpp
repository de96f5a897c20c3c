// Biconfluent Heun machinery: the regular power-series solution N, the
// logarithmic second local solution, the two irregular asymptotic solutions
// B+ and H+, and the connection coefficients K1, K2 linking them.
//
// Canonical form used throughout (y = y(z)):
//   z y'' + (1 + a - b z - 2 z^2) y' + [(g - a - 2) z - (d + b (1 + a))/2] y = 0
// with parameters p = (a, b, g, d) = (alpha_h, beta_h, gamma_h, delta_h).
// The physical family is (4l+2, 2 lambda, lambda^2, 0); the general-d case
// is required internally by the integral representation of K2.
#pragma once

#include <optional>
#include <utility>

#include "sqrtpot/numerics.hpp"

namespace sqrtpot {

struct HeunParams {
  Complex alpha_h;
  Complex beta_h;
  Complex gamma_h;
  Complex delta_h;
};

/// Physical-family constructor: (4l+2, 2 lambda, lambda^2, 0).
HeunParams heun_family(int l, Complex lambda);

struct SeriesResult {
  Complex value;
  Complex derivative;
  ErrorEstimate error;
};

struct ConnectionPair {
  Complex k1;
  Complex k2;
  double condition = 1.0;  ///< condition number of the 2x2 matching system
  ErrorEstimate error;
};

/// Tunables for series/asymptotic evaluation. Defaults match the values the
/// test-suite tolerances were calibrated against.
struct HeunOptions {
  int series_max_terms = 500;      ///< cap for the convergent power series
  int asymptotic_max_terms = 200;  ///< cap for the divergent asymptotic sums
  double series_domain = 12.0;     ///< |z| limit for direct series summation
  double match_radius_lo = 4.0;    ///< matching-radius scan window (lower)
  double match_radius_hi = 14.0;   ///< scan window upper bound for small |lambda|
  /// max|partial|/|sum| beyond which a series result is rejected.
  double cancellation_limit = 1e10;
};

/// Regular solution N(a,b,g,d; z) = sum_n c_n z^n, c_0 = 1, by the
/// three-term recurrence
///   (n+1)(n+1+a) c_{n+1} = [b n + (d + b(1+a))/2] c_n - (g - a - 2n) c_{n-1}.
/// For the physical family this is equivalent to the normalized expansion
/// sum_n A_n / ((1+a)_n n!) z^n with A_0 = 1, A_1 = (4l+3) lambda,
///   A_{n+2} = lambda (4l+2n+5) A_{n+1} - (n+1)(4l+n+3)[lambda^2-(4l+2n+4)] A_n.
/// Throws NumericError on non-convergence within the term cap or when
/// cancellation exceeds the configured limit.
SeriesResult eval_N(const HeunParams& p, Complex z, double tol,
                    const HeunOptions& opt = {});

/// N(z) evaluated robustly at any |z| within the propagation range: uses the
/// direct power series while its measured cancellation is benign, else sums
/// the series at a cancellation-safe radius on the same ray and advances to
/// z with an adaptive ODE integrator. Throws if the result's exponent
/// overflows double range.
SeriesResult eval_N_auto(const HeunParams& p, Complex z, double tol,
                         const HeunOptions& opt = {});

/// Second local (Frobenius) solution for the physical family (delta_h = 0,
/// alpha_h = 4l+2):  y2(z) = c N(z) ln z + z^{-(4l+2)} sum_n d_n z^n with
/// d_0 = 1, the resonance constant
///   c = [lambda (4l+1) d_{4l+1} - (lambda^2 - 4l) d_{4l}] / (4l+2),
/// and the free coefficient d_{4l+2} fixed to 0 (basis convention).
SeriesResult eval_second_local(const HeunParams& p, Complex z, double tol,
                               const HeunOptions& opt = {});

/// Asymptotic irregular solution B+(z) = z^{(g-a-2)/2} sum_n a_n z^{-n}
/// (principal branch), optimally truncated at the globally smallest term.
/// error.absolute reports the first omitted term's magnitude.
SeriesResult eval_Bplus(const HeunParams& p, Complex z, int max_terms = 200);

/// Asymptotic irregular solution
/// H+(z) = z^{-(2+a+g)/2} e^{b z + z^2} sum_n e_n z^{-n}.
SeriesResult eval_Hplus(const HeunParams& p, Complex z, int max_terms = 200);

/// Coefficient sequences of the two asymptotic solutions for the physical
/// family, for callers assembling tail sums directly. Both follow from
/// substituting the prefactor-stripped expansions into the canonical ODE:
///   a_0 = 1, a_1 = lambda (lambda^2 - 1)/2,
///   2(n+2) a_{n+2} - [lambda^3 - (2n+3) lambda] a_{n+1}
///     + [lambda^4/4 - (n+1) lambda^2 + n(n+2) - 4l(l+1)] a_n = 0;
///   e_0 = 1, e_1 = -lambda (lambda^2 + 1)/2,
///   2(n+2) e_{n+2} + [lambda^3 + (2n+3) lambda] e_{n+1}
///     - [lambda^4/4 + (n+1) lambda^2 + n(n+2) - 4l(l+1)] e_n = 0.
std::vector<Complex> bplus_coefficients(int l, Complex lambda, int count);
std::vector<Complex> hplus_coefficients(int l, Complex lambda, int count);

/// Connection coefficients (K1, K2) with N = K1 B+ + K2 H+, obtained by
/// solving the 2x2 value/derivative matching system at an automatically
/// selected radius |z_m| on the ray arg z = ray_angle (-pi/4 for the
/// scattering ray, 0 for the bound ray). The result must be stable under
/// a +-15% change of the matching radius, else a NumericError is thrown.
ConnectionPair connection_by_matching(const HeunParams& p, double ray_angle,
                                      double tol, const HeunOptions& opt = {});

/// K2 by the integral representation
///   K2(a,b,g,d) = Gamma(1+a) / [Gamma((a-g)/2) Gamma(1+(a+g)/2)]
///                 * J_{1+(a+g)/2}((a+g)/2, b, (3a-g)/2, d + b(g-a)/2),
///   J_s(a,b,g,d) = int_0^infty x^{s-1} e^{-x^2-bx} N(a,b,g,d; x) dx,
/// evaluated as quadrature on [0, X] plus the algebraic large-x tail of the
/// integrand (which requires the inner connection coefficient and the inner
/// H+ coefficient sequence). Throws NumericError when the tail does not
/// decay (divergent parameter region).
std::pair<Complex, ErrorEstimate> K2_integral(const HeunParams& p, double tol,
                                              const HeunOptions& opt = {});

/// Sign and natural log of |K2| for the real bound-ray family
/// (a, b, g, d) = (4l+2, 2 lambda, lambda^2, 0) with lambda real negative.
/// Near a bound state the regular solution is recessive and K2 extraction
/// loses exp(4 |lambda| z_m) of precision, so this path evaluates the
/// series in MPFR arithmetic with a per-point working precision.
/// Returns {sign, ln|K2|}.
std::pair<int, double> k2_bound_ray_sign_log(int l, double lambda);

/// Full bound-ray connection data from the extended-precision path:
/// sign and ln|K2| as above, plus K1 (the coefficient of the algebraically
/// behaved solution B+), which is well-conditioned and fits in a double.
struct BoundRayConnection {
  int k2_sign = 0;
  double ln_abs_k2 = 0.0;
  double k1 = 0.0;
};
BoundRayConnection bound_ray_connection(int l, double lambda);

/// Regular solution N and dN/dz at real z > 0 on the bound ray, summed in
/// extended precision (the double-precision series loses exp(z^2+2|lambda|z)
/// to cancellation once z is moderate). Values fit in doubles whenever the
/// result is physically relevant (recessive or mildly dominant regime).
std::pair<double, double> n_bound_ray(int l, double lambda, double z);

}  // namespace sqrtpot
