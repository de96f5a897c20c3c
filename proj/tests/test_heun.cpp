#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sqrtpot/heun.hpp"

using namespace sqrtpot;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

Complex ode_c1(const HeunParams& p, Complex z) {
  return 1.0 + p.alpha_h - p.beta_h * z - 2.0 * z * z;
}
Complex ode_c0(const HeunParams& p, Complex z) {
  return (p.gamma_h - p.alpha_h - 2.0) * z -
         0.5 * (p.delta_h + p.beta_h * (1.0 + p.alpha_h));
}

// Normalized residual of the canonical ODE using a 4th-order finite
// difference of the analytic first derivative for y''.
template <typename Eval>
double ode_residual(const HeunParams& p, Complex z, Eval eval, double h) {
  const SeriesResult s0 = eval(z);
  const Complex d2 = (-eval(z + 2.0 * h).derivative +
                      8.0 * eval(z + h).derivative -
                      8.0 * eval(z - h).derivative +
                      eval(z - 2.0 * h).derivative) /
                     (12.0 * h);
  const Complex t2 = z * d2;
  const Complex t1 = ode_c1(p, z) * s0.derivative;
  const Complex t0 = ode_c0(p, z) * s0.value;
  return std::abs(t2 + t1 + t0) /
         (std::abs(t2) + std::abs(t1) + std::abs(t0) + 1e-300);
}
}  // namespace

TEST_CASE("eval_N: value and derivative at the origin") {
  for (int l : {0, 1, 3}) {
    for (Complex lam : {Complex(0.7, 0.0), Complex(0.3, -0.4)}) {
      const HeunParams p = heun_family(l, lam);
      const SeriesResult s = eval_N(p, Complex(0.0), 1e-12);
      CHECK(std::abs(s.value - 1.0) == 0.0);
      // c_1 = (d + b(1+a))/2 / (1+a) = lambda for the physical family.
      CHECK(std::abs(s.derivative - lam) < 1e-14);
    }
  }
}

TEST_CASE("eval_N: ODE residual at a generic family point") {
  const HeunParams p =
      heun_family(1, 0.7 * std::exp(Complex(0.0, -kPi / 4.0)));
  auto eval = [&](Complex z) { return eval_N(p, z, 1e-13); };
  CHECK(ode_residual(p, Complex(1.0, 0.3), eval, 1e-3) < 1e-10);
}

TEST_CASE("eval_second_local: ODE residual and Frobenius prefactor") {
  const HeunParams p = heun_family(0, Complex(0.0));
  auto eval = [&](Complex z) { return eval_second_local(p, z, 1e-13); };
  CHECK(ode_residual(p, Complex(0.5), eval, 1e-4) < 1e-9);
  // l=0, lambda=0: the resonance constant vanishes, so z^2 y2 -> d_0 = 1
  // with no logarithmic contamination.
  const SeriesResult tiny = eval_second_local(p, Complex(1e-3), 1e-13);
  CHECK(std::abs(tiny.value * 1e-6 - 1.0) < 1e-5);
}

TEST_CASE("second local solution: Abel identity with the regular one") {
  const HeunParams p = heun_family(0, Complex(0.4));
  auto scaled_w = [&](Complex z) {
    const SeriesResult y1 = eval_N(p, z, 1e-13);
    const SeriesResult y2 = eval_second_local(p, z, 1e-13);
    const Complex w = y1.value * y2.derivative - y1.derivative * y2.value;
    // W ~ z^{-(1+a)} e^{b z + z^2}; strip that growth.
    return w * std::pow(z, 1.0 + p.alpha_h) *
           std::exp(-p.beta_h * z - z * z);
  };
  const Complex w1 = scaled_w(Complex(0.5));
  const Complex w2 = scaled_w(Complex(1.0));
  CHECK(std::abs(w1) > 0.0);
  CHECK(std::abs(w1 / w2 - 1.0) < 1e-8);
}

TEST_CASE("asymptotic coefficients: closed-form low orders") {
  // a_1 = lambda (lambda^2 - 1)/2 vanishes at lambda = 1;
  // e_1 = -lambda (lambda^2 + 1)/2 = -1 there.
  const auto as = bplus_coefficients(0, Complex(1.0), 4);
  const auto es = hplus_coefficients(0, Complex(1.0), 4);
  CHECK(std::abs(as[0] - 1.0) == 0.0);
  CHECK(std::abs(as[1]) < 1e-15);
  CHECK(std::abs(es[1] + 1.0) < 1e-15);
  // Generic lambda.
  const Complex lam(0.6, -0.3);
  const auto a2 = bplus_coefficients(0, lam, 2);
  const auto e2 = hplus_coefficients(0, lam, 2);
  CHECK(std::abs(a2[1] - 0.5 * lam * (lam * lam - 1.0)) < 1e-15);
  CHECK(std::abs(e2[1] + 0.5 * lam * (lam * lam + 1.0)) < 1e-15);
}

TEST_CASE("asymptotic coefficients: lambda = 0, l = 0 degeneracy") {
  // Both recurrences collapse: every coefficient beyond a_0 vanishes, so
  // the a- and e-sequences coincide termwise.
  const auto as = bplus_coefficients(0, Complex(0.0), 10);
  const auto es = hplus_coefficients(0, Complex(0.0), 10);
  for (int n = 1; n < 10; ++n) {
    CHECK(std::abs(as[n]) == 0.0);
    CHECK(std::abs(es[n]) == 0.0);
  }
}

TEST_CASE("eval_Bplus / eval_Hplus: residual within the truncation bound") {
  // Short truncations make the first-omitted-term bound large enough to
  // dominate finite-difference noise.
  {
    const HeunParams p =
        heun_family(0, 0.5 * std::exp(Complex(0.0, -kPi / 4.0)));
    const Complex z = 8.0 * std::exp(Complex(0.0, -kPi / 4.0));
    auto eval = [&](Complex zz) { return eval_Bplus(p, zz, 8); };
    const SeriesResult s = eval(z);
    const double bound = s.error.absolute / std::max(std::abs(s.value), 1e-300);
    CHECK(bound > 0.0);
    CHECK(ode_residual(p, z, eval, 1e-3) < 10.0 * bound + 1e-12);
  }
  {
    const HeunParams p = heun_family(0, Complex(0.8));
    const Complex z(8.0);
    auto eval = [&](Complex zz) { return eval_Hplus(p, zz, 8); };
    const SeriesResult s = eval(z);
    const double bound = s.error.absolute / std::max(std::abs(s.value), 1e-300);
    CHECK(ode_residual(p, z, eval, 1e-3) < 10.0 * bound + 1e-12);
  }
}

TEST_CASE("eval_N_auto: agrees with the plain series where both work") {
  const HeunParams p = heun_family(0, Complex(0.3, -0.3));
  const Complex z(2.0, -1.0);
  const SeriesResult a = eval_N(p, z, 1e-13);
  const SeriesResult b = eval_N_auto(p, z, 1e-13);
  CHECK(std::abs(a.value - b.value) < 1e-12 * std::abs(a.value));
}

TEST_CASE("connection: scattering-ray fixture (alpha=1, k=1, l=0)") {
  const Complex lam = std::exp(Complex(0.0, -kPi / 4.0)) / std::sqrt(2.0);
  const HeunParams p = heun_family(0, lam);
  const ConnectionPair c = connection_by_matching(p, -kPi / 4.0, 1e-9);
  // Frozen from an extended-precision run of the same matching system.
  const Complex k1_ref(-0.8530099326, 0.2665522060);
  const Complex k2_ref(0.5759795326, 0.1799845671);
  CHECK(std::abs(c.k1 - k1_ref) < 5e-8);
  CHECK(std::abs(c.k2 - k2_ref) < 5e-8);
  CHECK(c.error.relative < 1e-8);
}

TEST_CASE("connection: Wronskian of (B+, H+) obeys Abel's identity") {
  const Complex lam = std::exp(Complex(0.0, -kPi / 4.0)) / std::sqrt(2.0);
  const HeunParams p = heun_family(0, lam);
  auto scaled_w = [&](double radius) {
    const Complex z = radius * std::exp(Complex(0.0, -kPi / 4.0));
    const SeriesResult b = eval_Bplus(p, z);
    const SeriesResult h = eval_Hplus(p, z);
    return (b.value * h.derivative - b.derivative * h.value) *
           std::pow(z, 1.0 + p.alpha_h) * std::exp(-p.beta_h * z - z * z);
  };
  CHECK(std::abs(scaled_w(8.0) / scaled_w(11.0) - 1.0) < 1e-8);
}

TEST_CASE("bound-ray K2: extended-precision value and matching agree") {
  // l = 0, alpha = 1, kappa = 1 => lambda = -1/sqrt(2).
  const double lambda = -1.0 / std::sqrt(2.0);
  const auto [sign, ln_abs] = k2_bound_ray_sign_log(0, lambda);
  const double k2_big = sign * std::exp(ln_abs);
  CHECK(k2_big == doctest::Approx(1.66522698943).epsilon(1e-9));
  const HeunParams p = heun_family(0, Complex(lambda));
  const ConnectionPair c = connection_by_matching(p, 0.0, 1e-9);
  CHECK(std::abs(c.k2.real() - k2_big) < 1e-6 * std::abs(k2_big));
  CHECK(std::abs(c.k2.imag()) < 1e-8);
}

TEST_CASE("K2_integral: agrees with matching at a convergent point") {
  const HeunParams p = heun_family(0, Complex(-1.0 / std::sqrt(2.0)));
  const auto [v, err] = K2_integral(p, 1e-8);
  CHECK(std::abs(v.real() - 1.66522698943) < 1e-6);
  CHECK(std::abs(v.imag()) < 1e-8);
}

TEST_CASE("K2_integral: divergent parameter region is flagged") {
  // Deeply bound region: |lambda| so large the integral tail blows up
  // (or the inner series overflows) -> must throw, not return garbage.
  const double lambda = -1.0 / std::sqrt(2.0 * std::pow(0.25, 3));
  CHECK_THROWS_AS((void)K2_integral(heun_family(0, Complex(lambda)), 1e-8),
                  NumericError);
}

TEST_CASE("n_bound_ray: matches the double series at benign z") {
  const double lambda = -0.9;
  const HeunParams p = heun_family(0, Complex(lambda));
  const auto [nv, nd] = n_bound_ray(0, lambda, 2.0);
  const SeriesResult s = eval_N(p, Complex(2.0), 1e-13);
  CHECK(nv == doctest::Approx(s.value.real()).epsilon(1e-11));
  CHECK(nd == doctest::Approx(s.derivative.real()).epsilon(1e-11));
}
