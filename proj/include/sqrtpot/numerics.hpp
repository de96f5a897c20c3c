// Complex-arithmetic foundation shared by all higher modules: log-gamma,
// Pochhammer symbols, compensated summation, bracketed root-finding and
// adaptive Gauss-Kronrod quadrature.
#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace sqrtpot {

using Complex = std::complex<double>;

/// Relative errors are measured against max(|value|, kTinyFloor) so an
/// exact-zero result does not divide by zero.
inline constexpr double kTinyFloor = 1e-300;

/// Error/diagnostic metadata attached to every truncated-series or
/// quadrature result.
struct ErrorEstimate {
  double absolute = 0.0;   ///< bound on the absolute error
  double relative = 0.0;   ///< absolute / max(|value|, kTinyFloor)
  int terms_used = 0;      ///< series terms or integrand evaluations
  /// max |partial sum| / |final sum|; large values signal cancellation.
  double cancellation = 1.0;
};

/// Thrown when a computation cannot meet its contract (poles, divergence,
/// missing sign change, ...). `what()` carries the diagnostic.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Principal branch of log Gamma(z), accurate to ~1e-13 relative (in
/// exp(result)) for |z| <= 50. Reflection formula handles Re z < 0.5.
/// Throws NumericError within 1e-12 of a non-positive integer.
Complex ln_gamma(Complex z);

/// Pochhammer symbol (a)_n = Gamma(a+n)/Gamma(a). Direct product for
/// n <= 64, log-gamma ratio beyond.
Complex pochhammer(Complex a, int n);

/// Kahan-Neumaier compensated sum. The estimate's `absolute` field bounds
/// accumulated rounding; `cancellation` reports max|partial|/|sum|.
/// Throws NumericError if a partial sum overflows.
std::pair<Complex, ErrorEstimate> compensated_sum(std::span<const Complex> terms);

/// Hybrid bisection / inverse-quadratic-interpolation root finder on a
/// bracketing interval (Brent's method). Requires f(lo)*f(hi) < 0.
double find_root_bracketed(const std::function<double(double)>& f, double lo,
                           double hi, double tol);

/// Adaptive Gauss-Kronrod (7,15) quadrature of a complex-valued integrand
/// over the finite interval [a, b].
std::pair<Complex, ErrorEstimate> adaptive_quadrature(
    const std::function<Complex(double)>& f, double a, double b, double tol,
    int max_depth = 60);

}  // namespace sqrtpot
