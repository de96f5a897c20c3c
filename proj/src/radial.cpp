#include "sqrtpot/radial.hpp"

#include <cmath>

namespace sqrtpot {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

void check_config(const PhysicalConfig& cfg) {
  if (cfg.alpha < 0.0 || !std::isfinite(cfg.alpha)) {
    throw NumericError("PhysicalConfig: alpha must be finite and >= 0");
  }
  if (cfg.l < 0) throw NumericError("PhysicalConfig: l must be >= 0");
  const bool scattering = cfg.k.imag() == 0.0 && cfg.k.real() > 0.0;
  const bool bound = cfg.k.real() == 0.0 && cfg.k.imag() > 0.0;
  if (!scattering && !bound) {
    throw NumericError(
        "PhysicalConfig: k must lie on the positive real axis (scattering) "
        "or the positive imaginary axis (bound)");
  }
}

}  // namespace

ParamMap map_params(const PhysicalConfig& cfg) {
  check_config(cfg);
  ParamMap out;
  const Complex k = cfg.k;
  if (cfg.is_bound()) {
    const double kappa = cfg.kappa();
    // lambda = alpha/sqrt(2 i k^3) continued to k = i kappa on the principal
    // branch: lambda = -alpha/sqrt(2 kappa^3), real and negative.
    out.lambda = Complex(-cfg.alpha / std::sqrt(2.0 * kappa * kappa * kappa));
    out.ray = Complex(1.0, 0.0);
    out.z_of_r = [kappa](double r) {
      return Complex(std::sqrt(2.0 * kappa * r), 0.0);
    };
  } else {
    const double kr = k.real();
    const Complex em = std::exp(Complex(0.0, -kPi / 4.0));
    out.lambda = cfg.alpha * em / std::sqrt(2.0 * kr * kr * kr);
    out.ray = em;
    out.z_of_r = [kr, em](double r) { return std::sqrt(2.0 * kr * r) * em; };
  }
  out.params = heun_family(cfg.l, out.lambda);
  return out;
}

RadialPoint regular_u(const PhysicalConfig& cfg, double r, double tol) {
  if (!(r > 0)) throw NumericError("regular_u: requires r > 0");
  const ParamMap pm = map_params(cfg);
  const Complex z = pm.z_of_r(r);
  const SeriesResult n = eval_N_auto(pm.params, z, tol);

  // u = A_l (-2ikr)^{l+1} e^{i(kr + (alpha/k) sqrt r)} N(z) with
  // A_l = (-2ik)^{-(l+1)}, i.e. u = r^{l+1} e^{i(kr + (alpha/k) sqrt r)} N(z).
  const Complex k = cfg.k;
  const double sr = std::sqrt(r);
  const Complex phase = Complex(0.0, 1.0) * (k * r + (cfg.alpha / k) * sr);
  const Complex pre = std::pow(r, double(cfg.l + 1)) * std::exp(phase);

  RadialPoint out;
  out.r = r;
  out.u = pre * n.value;
  const Complex dlog_pre =
      Complex(double(cfg.l + 1) / r) +
      Complex(0.0, 1.0) * (k + cfg.alpha / (2.0 * k * sr));
  const Complex dz_dr = z / (2.0 * r);
  out.du_dr = pre * (dlog_pre * n.value + n.derivative * dz_dr);
  return out;
}

Complex asymptotic_u_infinity(const PhysicalConfig& cfg, int sign, double r) {
  check_config(cfg);
  if (sign != 1 && sign != -1) {
    throw NumericError("asymptotic_u_infinity: sign must be +1 or -1");
  }
  if (!(r > 0)) throw NumericError("asymptotic_u_infinity: requires r > 0");
  const Complex k = cfg.k;
  const Complex theta = k * r + (cfg.alpha / k) * std::sqrt(r) -
                        cfg.alpha * cfg.alpha / (8.0 * k * k * k) * std::log(r);
  return std::exp(Complex(0.0, double(sign)) * theta);
}

}  // namespace sqrtpot
