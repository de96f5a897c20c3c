#include "sqrtpot/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace sqrtpot {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Lanczos approximation, g = 7, 9 coefficients.
constexpr int kLanczosG = 7;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

// log Gamma for Re z >= 0.5 via Lanczos.
Complex ln_gamma_half_plane(Complex z) {
  z -= 1.0;
  Complex x = kLanczos[0];
  for (int i = 1; i < kLanczosG + 2; ++i) x += kLanczos[i] / (z + double(i));
  const Complex t = z + (kLanczosG + 0.5);
  return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

}  // namespace

Complex ln_gamma(Complex z) {
  if (z.imag() == 0.0 && z.real() <= 0.0 &&
      std::abs(z.real() - std::round(z.real())) < 1e-12) {
    throw NumericError("ln_gamma: pole at non-positive integer z = " +
                       std::to_string(z.real()));
  }
  if (z.real() >= 0.5) return ln_gamma_half_plane(z);
  // Reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z). To keep the principal
  // branch continuous, use log sin through log(1 - e^{2 pi i z}) pieces for
  // large |Im z| where sin overflows.
  const Complex log_pi = std::log(Complex(kPi));
  Complex log_sin;
  if (std::abs(z.imag()) < 30.0) {
    log_sin = std::log(std::sin(kPi * z));
  } else {
    // sin(pi z) = (e^{i pi z} - e^{-i pi z}) / 2i; factor out the growing
    // exponential to avoid overflow.
    const Complex ipz = Complex(0, kPi) * z;
    if (z.imag() > 0) {
      log_sin = -ipz + std::log((std::exp(2.0 * ipz) - 1.0) / Complex(0, 2));
    } else {
      log_sin = ipz + std::log((1.0 - std::exp(-2.0 * ipz)) / Complex(0, 2));
    }
  }
  Complex result = log_pi - log_sin - ln_gamma_half_plane(1.0 - z);
  // Principal branch: for real z the result must be real when Gamma(z) > 0.
  if (z.imag() == 0.0) result.imag(std::remainder(result.imag(), 2.0 * kPi));
  return result;
}

Complex pochhammer(Complex a, int n) {
  if (n < 0) throw NumericError("pochhammer: negative n");
  if (n <= 64) {
    Complex p = 1.0;
    for (int i = 0; i < n; ++i) p *= a + double(i);
    return p;
  }
  return std::exp(ln_gamma(a + double(n)) - ln_gamma(a));
}

std::pair<Complex, ErrorEstimate> compensated_sum(std::span<const Complex> terms) {
  // Neumaier variant, applied per component.
  double sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0;
  double max_partial = 0.0;
  for (const Complex& t : terms) {
    double tr = t.real(), ti = t.imag();
    double yr = sr + tr;
    cr += (std::abs(sr) >= std::abs(tr)) ? (sr - yr) + tr : (tr - yr) + sr;
    sr = yr;
    double yi = si + ti;
    ci += (std::abs(si) >= std::abs(ti)) ? (si - yi) + ti : (ti - yi) + si;
    si = yi;
    max_partial = std::max(max_partial, std::hypot(sr, si));
    if (!std::isfinite(sr) || !std::isfinite(si)) {
      throw NumericError("compensated_sum: partial sum overflow");
    }
  }
  const Complex value(sr + cr, si + ci);
  ErrorEstimate err;
  err.terms_used = static_cast<int>(terms.size());
  const double mag = std::max(std::abs(value), kTinyFloor);
  err.cancellation = std::max(1.0, max_partial / mag);
  err.absolute = std::numeric_limits<double>::epsilon() * max_partial *
                 std::sqrt(double(std::max<std::size_t>(terms.size(), 1)));
  err.relative = err.absolute / mag;
  return {value, err};
}

double find_root_bracketed(const std::function<double(double)>& f, double lo,
                           double hi, double tol) {
  if (!(lo < hi) || !(tol > 0)) {
    throw NumericError("find_root_bracketed: invalid bracket or tolerance");
  }
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (!std::isfinite(fa) || !std::isfinite(fb)) {
    throw NumericError("find_root_bracketed: non-finite endpoint evaluation");
  }
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0) throw NumericError("find_root_bracketed: no sign change");

  // Brent's method.
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() *
                            std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {  // secant
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {  // inverse quadratic
        const double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q),
                             std::abs(e * q))) {
        e = d; d = p / q;
      } else {
        d = xm; e = d;
      }
    } else {
      d = xm; e = d;
    }
    a = b; fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
    if (!std::isfinite(fb)) {
      throw NumericError("find_root_bracketed: non-finite evaluation");
    }
    if ((fb > 0) == (fc > 0)) {
      c = a; fc = fa; d = b - a; e = d;
    }
  }
  return b;
}

namespace {

// 15-point Kronrod nodes/weights on [-1,1] with embedded 7-point Gauss rule.
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct GKResult {
  Complex value;
  double error;
};

GKResult gk15(const std::function<Complex(double)>& f, double a, double b) {
  const double h = 0.5 * (b - a), mid = 0.5 * (a + b);
  Complex gauss = 0.0, kronrod = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dx = h * kKronrodNodes[i];
    Complex fv;
    if (i == 7) {
      fv = f(mid);
      kronrod += kKronrodWeights[i] * fv;
      gauss += kGaussWeights[3] * fv;
    } else {
      const Complex f1 = f(mid - dx), f2 = f(mid + dx);
      if (!std::isfinite(std::abs(f1)) || !std::isfinite(std::abs(f2))) {
        throw NumericError("adaptive_quadrature: non-finite integrand");
      }
      kronrod += kKronrodWeights[i] * (f1 + f2);
      if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (f1 + f2);
    }
  }
  const Complex value = kronrod * h;
  const double diff = std::abs(kronrod - gauss) * std::abs(h);
  // QUADPACK-style sharpened estimate: (200*diff)^{3/2} when that is
  // smaller (smooth integrand), plain |K15-G7| otherwise.
  const double err = diff > 0 ? std::min(diff, std::pow(200.0 * diff, 1.5)) : 0.0;
  return {value, err};
}

void gk_adapt(const std::function<Complex(double)>& f, double a, double b,
              double tol, int depth, int max_depth, Complex& sum, double& err,
              int& evals) {
  const GKResult r = gk15(f, a, b);
  evals += 15;
  if (r.error <= tol || depth >= max_depth) {
    if (depth >= max_depth && r.error > tol) {
      throw NumericError("adaptive_quadrature: max subdivision depth exceeded");
    }
    sum += r.value;
    err += r.error;
    return;
  }
  const double mid = 0.5 * (a + b);
  gk_adapt(f, a, mid, 0.5 * tol, depth + 1, max_depth, sum, err, evals);
  gk_adapt(f, mid, b, 0.5 * tol, depth + 1, max_depth, sum, err, evals);
}

}  // namespace

std::pair<Complex, ErrorEstimate> adaptive_quadrature(
    const std::function<Complex(double)>& f, double a, double b, double tol,
    int max_depth) {
  if (!(a < b)) throw NumericError("adaptive_quadrature: requires a < b");
  Complex sum = 0.0;
  double err = 0.0;
  int evals = 0;
  gk_adapt(f, a, b, tol, 0, max_depth, sum, err, evals);
  ErrorEstimate e;
  e.absolute = err;
  e.relative = err / std::max(std::abs(sum), kTinyFloor);
  e.terms_used = evals;
  return {sum, e};
}

}  // namespace sqrtpot
