#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sqrtpot/radial.hpp"

using namespace sqrtpot;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

TEST_CASE("map_params: bound-ray branch algebra (alpha=1, kappa=1)") {
  PhysicalConfig cfg{1.0, 0, Complex(0.0, 1.0)};
  const ParamMap pm = map_params(cfg);
  // Bound continuation on the principal branch gives real negative lambda
  // and real positive z.
  CHECK(pm.lambda.real() == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(pm.lambda.imag() == 0.0);
  const Complex z1 = pm.z_of_r(1.0);
  CHECK(z1.real() == doctest::Approx(std::sqrt(2.0)));
  CHECK(z1.imag() == 0.0);
}

TEST_CASE("map_params: scattering ray (alpha=1, k=1) and alpha_h at l=2") {
  PhysicalConfig cfg{1.0, 0, Complex(1.0, 0.0)};
  const ParamMap pm = map_params(cfg);
  const Complex em = std::exp(Complex(0.0, -kPi / 4.0));
  CHECK(std::abs(pm.lambda - em / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(pm.z_of_r(1.0) - std::sqrt(2.0) * em) < 1e-15);

  PhysicalConfig cfg2{1.0, 2, Complex(1.0, 0.0)};
  CHECK(map_params(cfg2).params.alpha_h.real() == doctest::Approx(10.0));
}

TEST_CASE("map_params: invalid configurations rejected") {
  CHECK_THROWS_AS((void)map_params({-1.0, 0, Complex(1.0, 0.0)}), NumericError);
  CHECK_THROWS_AS((void)map_params({1.0, -1, Complex(1.0, 0.0)}), NumericError);
  CHECK_THROWS_AS((void)map_params({1.0, 0, Complex(1.0, 1.0)}), NumericError);
  CHECK_THROWS_AS((void)map_params({1.0, 0, Complex(-1.0, 0.0)}), NumericError);
}

TEST_CASE("regular_u: r -> 0 normalization u / r^{l+1} -> 1") {
  for (int l : {0, 1, 2}) {
    PhysicalConfig cfg{1.0, l, Complex(1.0, 0.0)};
    const RadialPoint p = regular_u(cfg, 1e-6, 1e-12);
    const Complex ratio = p.u / std::pow(1e-6, double(l + 1));
    CHECK(std::abs(ratio - 1.0) < 1e-4);
  }
}

TEST_CASE("regular_u: free particle closed form sin(kr)/k") {
  PhysicalConfig cfg{0.0, 0, Complex(1.0, 0.0)};
  for (double r : {0.5, 1.0, 3.0}) {
    const RadialPoint p = regular_u(cfg, r, 1e-13);
    CHECK(std::abs(p.u - std::sin(r)) < 1e-10 * std::abs(std::sin(r)));
    CHECK(std::abs(p.du_dr - std::cos(r)) < 1e-10);
  }
}

TEST_CASE("regular_u: free particle matches r * spherical Bessel, l <= 2") {
  for (int l : {0, 1, 2}) {
    PhysicalConfig cfg{0.0, l, Complex(1.0, 0.0)};
    // Shape comparison; fix the constant at kr = 1.
    const Complex c =
        regular_u(cfg, 1.0, 1e-13).u / std::sph_bessel(unsigned(l), 1.0);
    for (double r : {0.5, 1.0, 5.0}) {
      const Complex expect = c * r * std::sph_bessel(unsigned(l), r) / 1.0;
      CHECK(std::abs(regular_u(cfg, r, 1e-13).u - expect) <
            1e-10 * std::max(std::abs(expect), 1.0));
    }
  }
}

TEST_CASE("regular_u: small-r expansion r^{l+1}(1 - 4 alpha r^{3/2}/(12l+15))") {
  // Frobenius near the origin: the r^{1/2} and r corrections vanish and the
  // leading one is c3 r^{3/2} with c3 = -4 alpha/(12 l + 15).
  const double alpha = 1.3;
  for (int l : {0, 1}) {
    PhysicalConfig cfg{alpha, l, Complex(1.0, 0.0)};
    auto g = [&](double r) {
      const Complex u = regular_u(cfg, r, 1e-14).u;
      return ((u / std::pow(r, double(l + 1)) - 1.0) / (r * std::sqrt(r)))
          .real();
    };
    // The next correction is O(r^{1/2}) relative; eliminate it with one
    // Richardson stage of ratio 2 in sqrt(r).
    const double r0 = 1e-4;
    const double g1 = g(r0), g2 = g(r0 / 4.0);
    const double c3 = 2.0 * g2 - g1;
    CHECK(c3 == doctest::Approx(-4.0 * alpha / (12.0 * l + 15.0))
                    .epsilon(1e-6));
  }
}

TEST_CASE("asymptotic_u_infinity: free limit, modulus, phase derivative") {
  PhysicalConfig free{0.0, 0, Complex(2.0, 0.0)};
  CHECK(std::abs(asymptotic_u_infinity(free, +1, 3.0) -
                 std::exp(Complex(0.0, 6.0))) < 1e-14);

  PhysicalConfig cfg{1.0, 0, Complex(1.0, 0.0)};
  for (double r : {0.5, 7.0, 1234.0}) {
    CHECK(std::abs(std::abs(asymptotic_u_infinity(cfg, +1, r)) - 1.0) < 1e-13);
  }

  // dTheta/dr = k + alpha/(2 k sqrt r) - alpha^2/(8 k^3 r) at r = 1e3.
  const double r = 1e3, h = 1e-2;
  const Complex up = asymptotic_u_infinity(cfg, +1, r + h);
  const Complex um = asymptotic_u_infinity(cfg, +1, r - h);
  const double dtheta = std::arg(up / um) / (2.0 * h);
  const double expect = 1.0 + 1.0 / (2.0 * std::sqrt(r)) - 1.0 / (8.0 * r);
  CHECK(dtheta == doctest::Approx(expect).epsilon(1e-8));

  CHECK_THROWS_AS((void)asymptotic_u_infinity(cfg, 2, 1.0), NumericError);
}
