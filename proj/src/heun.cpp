#include "sqrtpot/heun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "sqrtpot/bigreal.hpp"

namespace sqrtpot {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Complex half_source(const HeunParams& p) {
  return 0.5 * (p.delta_h + p.beta_h * (1.0 + p.alpha_h));
}

// Coefficients c_n of N = sum c_n z^n from the three-term recurrence
//   (n+1)(n+1+a) c_{n+1} = [b n + (d + b(1+a))/2] c_n - (g - a - 2n) c_{n-1}.
Complex next_coeff(const HeunParams& p, int n, Complex cn, Complex cnm1) {
  return ((p.beta_h * double(n) + half_source(p)) * cn -
          (p.gamma_h - p.alpha_h - 2.0 * n) * cnm1) /
         (double(n + 1) * (double(n + 1) + p.alpha_h));
}

}  // namespace

HeunParams heun_family(int l, Complex lambda) {
  return HeunParams{Complex(4.0 * l + 2.0), 2.0 * lambda, lambda * lambda,
                    Complex(0.0)};
}

SeriesResult eval_N(const HeunParams& p, Complex z, double tol,
                    const HeunOptions& opt) {
  if (std::abs(z) > opt.series_domain) {
    throw NumericError("eval_N: |z| exceeds the series domain radius");
  }
  if (!(tol > 0)) throw NumericError("eval_N: tol must be positive");

  Complex cnm1 = 0.0, cn = 1.0;
  Complex value = 0.0, dvalue = 0.0, zpow = 1.0;
  double max_partial = 0.0;
  int small_streak = 0;
  int used = opt.series_max_terms;
  bool converged = false;
  double last_term_mag = 0.0;
  // Neumaier compensation for the value accumulator.
  double comp_re = 0.0, comp_im = 0.0;
  auto add_compensated = [&](Complex t) {
    const double tr = t.real(), ti = t.imag();
    double y = value.real() + tr;
    comp_re += (std::abs(value.real()) >= std::abs(tr)) ? (value.real() - y) + tr
                                                        : (tr - y) + value.real();
    const double yi = value.imag() + ti;
    comp_im += (std::abs(value.imag()) >= std::abs(ti)) ? (value.imag() - yi) + ti
                                                        : (ti - yi) + value.imag();
    value = Complex(y, yi);
  };

  for (int n = 0; n < opt.series_max_terms; ++n) {
    const Complex term = cn * zpow;
    add_compensated(term);
    if (n >= 1 && z != 0.0) dvalue += double(n) * term / z;
    max_partial = std::max(max_partial, std::abs(value));
    last_term_mag = std::abs(term);
    const Complex cnext = next_coeff(p, n, cn, cnm1);
    cnm1 = cn;
    cn = cnext;
    zpow *= z;
    if (last_term_mag <= tol * std::max(std::abs(value), kTinyFloor)) {
      if (++small_streak >= 2) {
        used = n + 1;
        converged = true;
        break;
      }
    } else {
      small_streak = 0;
    }
  }
  value += Complex(comp_re, comp_im);
  if (z == 0.0) {
    // derivative at the origin is c_1
    dvalue = half_source(p) / (1.0 + p.alpha_h);
  }
  if (!converged && std::abs(z) > 0) {
    throw NumericError("eval_N: series did not converge within the term cap");
  }
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag()) ||
      !std::isfinite(dvalue.real()) || !std::isfinite(dvalue.imag())) {
    throw NumericError(
        "eval_N: partial sums overflowed (cancellation beyond double range)");
  }
  ErrorEstimate err;
  err.terms_used = used;
  const double mag = std::max(std::abs(value), kTinyFloor);
  err.cancellation = std::max(1.0, max_partial / mag);
  if (err.cancellation > opt.cancellation_limit) {
    throw NumericError("eval_N: catastrophic cancellation (max|partial|/|sum| = " +
                       std::to_string(err.cancellation) + ")");
  }
  err.absolute = last_term_mag + kEps * max_partial * std::sqrt(double(used));
  err.relative = err.absolute / mag;
  return {value, dvalue, err};
}

SeriesResult eval_second_local(const HeunParams& p, Complex z, double tol,
                               const HeunOptions& opt) {
  if (z == 0.0) throw NumericError("eval_second_local: z = 0 is the branch point");
  if (std::abs(z) > opt.series_domain) {
    throw NumericError("eval_second_local: |z| exceeds the series domain radius");
  }
  if (std::abs(p.delta_h) != 0.0) {
    throw NumericError("eval_second_local: requires the physical family (delta_h = 0)");
  }
  const double a_real = p.alpha_h.real();
  const int ah = int(std::lround(a_real));
  if (std::abs(p.alpha_h.imag()) != 0.0 || std::abs(a_real - ah) > 1e-12 ||
      ah < 2 || ah % 4 != 2) {
    throw NumericError("eval_second_local: alpha_h must equal 4l+2");
  }
  const Complex beta = p.beta_h, gamma = p.gamma_h;
  const Complex lambda = 0.5 * beta;

  // Coefficients g_m of the regular solution (source of the log terms).
  const int cap = opt.series_max_terms;
  std::vector<Complex> g(cap);
  g[0] = 1.0;
  {
    Complex cm1 = 0.0, c = 1.0;
    for (int n = 0; n + 1 < cap; ++n) {
      const Complex cnext = next_coeff(p, n, c, cm1);
      g[n + 1] = cnext;
      cm1 = c;
      c = cnext;
    }
  }

  // d-series: y2 = c_log N ln z + z^{-ah} sum d_n z^n. Below the resonance
  // index n = ah the homogeneous recurrence applies; the resonance fixes the
  // log constant; above it the recurrence carries the log source terms.
  std::vector<Complex> d(cap);
  d[0] = 1.0;
  auto recur_lhs_rest = [&](int n) {
    // contribution of d_{n-1}, d_{n-2} to the order-n equation
    Complex s = -(beta * double(n - 1 - ah) + half_source(p)) *
                (n >= 1 ? d[n - 1] : Complex(0));
    s += (gamma - p.alpha_h - 2.0 - 2.0 * double(n - 2 - ah)) *
         (n >= 2 ? d[n - 2] : Complex(0));
    return s;
  };
  Complex c_log = 0.0;
  for (int n = 1; n < cap; ++n) {
    if (n < ah) {
      d[n] = -recur_lhs_rest(n) / (double(n) * double(n - ah));
    } else if (n == ah) {
      // resonance: c_log = [lambda(4l+1) d_{4l+1} - (lambda^2-4l) d_{4l}]/(4l+2)
      c_log = (beta * 0.5 * double(ah - 1) * d[ah - 1] -
               (gamma - double(ah) + 2.0) * d[ah - 2]) /
              double(ah);
      d[ah] = 0.0;  // free-coefficient convention
    } else {
      const int m = n - ah;
      Complex rn = -c_log * ((2.0 * m + double(ah)) * g[m] -
                             beta * (m >= 1 ? g[m - 1] : Complex(0)) -
                             2.0 * (m >= 2 ? g[m - 2] : Complex(0)));
      d[n] = (rn - recur_lhs_rest(n)) / (double(n) * double(n - ah));
    }
  }

  // Sum S(z) = sum d_n z^n and its derivative.
  Complex S = 0.0, Sd = 0.0, zpow = 1.0;
  double max_partial = 0.0;
  int used = cap;
  int small_streak = 0;
  for (int n = 0; n < cap; ++n) {
    const Complex term = d[n] * zpow;
    S += term;
    if (n >= 1) Sd += double(n) * term / z;
    max_partial = std::max(max_partial, std::abs(S));
    zpow *= z;
    if (n > ah + 2 &&
        std::abs(term) <= tol * std::max(std::abs(S), kTinyFloor)) {
      if (++small_streak >= 2) {
        used = n + 1;
        break;
      }
    } else {
      small_streak = 0;
    }
  }

  const SeriesResult reg = eval_N(p, z, tol, opt);
  const Complex logz = std::log(z);
  const Complex zma = std::pow(z, -double(ah));
  SeriesResult out;
  out.value = c_log * reg.value * logz + zma * S;
  out.derivative = c_log * (reg.derivative * logz + reg.value / z) +
                   zma * (Sd - double(ah) * S / z);
  out.error.terms_used = used;
  const double mag = std::max(std::abs(out.value), kTinyFloor);
  out.error.cancellation = std::max(1.0, max_partial * std::abs(zma) / mag);
  out.error.absolute = std::abs(reg.error.absolute * c_log * logz) +
                       kEps * max_partial * std::abs(zma) * std::sqrt(double(used));
  out.error.relative = out.error.absolute / mag;
  return out;
}

namespace {

// Stripped asymptotic sum: returns (s, s') with s = sum_{n<n_opt} c_n z^{-n},
// truncated at the globally smallest term, plus the relative truncation bound.
struct AsympSum {
  Complex s, sd;
  double rel_trunc;
  int terms;
};

template <typename Rec>
AsympSum asymptotic_sum(Rec rec, Complex z, int max_terms) {
  std::vector<Complex> cs{Complex(1.0)};
  std::vector<double> mags{1.0};
  double min_mag = 1.0;
  const double abs_z = std::abs(z);
  for (int n = 1; n < max_terms; ++n) {
    const Complex c =
        rec(n, cs[n - 1], n >= 2 ? cs[n - 2] : Complex(0.0));
    cs.push_back(c);
    const double m = std::abs(c) * std::pow(abs_z, -n);
    mags.push_back(m);
    min_mag = std::min(min_mag, m);
    if (!std::isfinite(m) || m > 1e12 * min_mag) break;
  }
  int n_opt = int(std::min_element(mags.begin(), mags.end()) - mags.begin());
  n_opt = std::max(n_opt, 1);
  Complex s = 0.0, sd = 0.0;
  for (int n = n_opt - 1; n >= 0; --n) {
    const Complex zp = std::pow(z, -n);
    s += cs[n] * zp;
    if (n >= 1) sd += -double(n) * cs[n] * zp / z;
  }
  AsympSum out;
  out.s = s;
  out.sd = sd;
  out.rel_trunc = mags[n_opt] / std::max(std::abs(s), kTinyFloor);
  out.terms = n_opt;
  return out;
}

// General-delta recurrences for the stripped asymptotic sums, derived by
// substituting z^{sigma} sum c_n z^{-n} (B+) and e^{b z + z^2} z^{sigma}
// sum c_n z^{-n} (H+) into the canonical ODE.
AsympSum b_sum(const HeunParams& p, Complex z, int max_terms) {
  const Complex sig = 0.5 * (p.gamma_h - p.alpha_h - 2.0);
  auto rec = [&](int n, Complex cm1, Complex cm2) {
    return ((p.beta_h * (sig + 1.0 - double(n)) + 0.5 * p.delta_h +
             0.5 * p.beta_h * (1.0 + p.alpha_h)) *
                cm1 -
            (sig + 2.0 - double(n)) * (sig + 2.0 - double(n) + p.alpha_h) * cm2) /
           (2.0 * n);
  };
  return asymptotic_sum(rec, z, max_terms);
}

AsympSum h_sum(const HeunParams& p, Complex z, int max_terms) {
  const Complex sig = -0.5 * (2.0 + p.alpha_h + p.gamma_h);
  auto rec = [&](int n, Complex cm1, Complex cm2) {
    return ((p.beta_h * (sig + 1.0 - double(n)) +
             0.5 * p.beta_h * (1.0 + p.alpha_h) - 0.5 * p.delta_h) *
                cm1 +
            (sig + 2.0 - double(n)) * (sig + 2.0 - double(n) + p.alpha_h) * cm2) /
           (2.0 * n);
  };
  return asymptotic_sum(rec, z, max_terms);
}

struct ScaledPair {
  Complex value, deriv;   // actual = value * exp(log_scale)
  double log_scale;
  double rel_trunc;
  int terms;
};

ScaledPair scaled_B(const HeunParams& p, Complex z, int max_terms) {
  const Complex sig = 0.5 * (p.gamma_h - p.alpha_h - 2.0);
  const AsympSum a = b_sum(p, z, max_terms);
  const Complex lpref = sig * std::log(z);
  const Complex phase = std::exp(Complex(0.0, lpref.imag()));
  return {phase * a.s, phase * (sig / z * a.s + a.sd), lpref.real(),
          a.rel_trunc, a.terms};
}

ScaledPair scaled_H(const HeunParams& p, Complex z, int max_terms) {
  const Complex sig = -0.5 * (2.0 + p.alpha_h + p.gamma_h);
  const AsympSum e = h_sum(p, z, max_terms);
  const Complex lpref = sig * std::log(z) + p.beta_h * z + z * z;
  const Complex phase = std::exp(Complex(0.0, lpref.imag()));
  return {phase * e.s,
          phase * ((sig / z + p.beta_h + 2.0 * z) * e.s + e.sd), lpref.real(),
          e.rel_trunc, e.terms};
}

SeriesResult unscale(const ScaledPair& sp) {
  const double f = std::exp(sp.log_scale);
  SeriesResult out;
  out.value = sp.value * f;
  out.derivative = sp.deriv * f;
  out.error.terms_used = sp.terms;
  out.error.relative = sp.rel_trunc;
  out.error.absolute = sp.rel_trunc * std::abs(out.value);
  return out;
}

// --- propagation of N beyond the series domain along a ray -----------------
//
// On the scattering ray (arg z = -pi/4) both asymptotic solutions have
// comparable magnitude, so relative accuracy survives ODE propagation. The
// regular series is summed at a cancellation-safe radius z0 and the solution
// is advanced with an adaptive Dormand-Prince 5(4) integrator, renormalizing
// (with log-scale bookkeeping) to avoid overflow.
struct PropagatedN {
  Complex value, deriv;
  double log_scale;
  int terms;
};

struct DPState {
  Complex y0, y1;  // N and dN/dt along the ray (t = |z|)
};

PropagatedN propagate_N(const HeunParams& p, Complex ray, double t_target,
                        double tol, const HeunOptions& opt) {
  // Start the series at a radius where its measured cancellation keeps the
  // relative error well under tol, then advance by ODE integration.
  HeunOptions local = opt;
  local.cancellation_limit = 1e290;
  double t0 = std::min(4.0, t_target);
  SeriesResult s0;
  for (;;) {
    bool ok = false;
    try {
      s0 = eval_N(p, t0 * ray, std::min(tol, 1e-14), local);
      ok = s0.error.cancellation * kEps <= 0.02 * tol;
    } catch (const NumericError&) {
      if (t0 <= 1.0) throw;  // even the smallest start radius overflows
    }
    if (ok || t0 <= 1.0) break;
    t0 = std::max(1.0, 0.7 * t0);
  }
  if (t_target <= t0) {
    return {s0.value, s0.derivative * ray, 0.0, s0.error.terms_used};
  }

  DPState y{s0.value, s0.derivative * ray};
  double log_scale = 0.0;
  auto rhs = [&](double t, const DPState& s) -> DPState {
    const Complex z = t * ray;
    const Complex npp =
        -((1.0 + p.alpha_h - p.beta_h * z - 2.0 * z * z) * (s.y1 / ray) +
          ((p.gamma_h - p.alpha_h - 2.0) * z - half_source(p)) * s.y0) /
        z * ray * ray;
    return {s.y1, npp};
  };

  // Dormand-Prince 5(4) tableau.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                          e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100,
                          e7 = -1.0 / 40;

  const double rtol = 1e-12;
  double t = t0;
  double h = 1e-3;
  auto axpy = [](const DPState& s, double f, const DPState& k) {
    return DPState{s.y0 + f * k.y0, s.y1 + f * k.y1};
  };
  int steps = 0;
  while (t < t_target) {
    if (steps++ > 2000000) {
      throw NumericError("propagate_N: step limit exceeded");
    }
    h = std::min(h, t_target - t);
    const DPState k1 = rhs(t, y);
    const DPState k2 = rhs(t + c2 * h, axpy(y, h * a21, k1));
    DPState tmp = axpy(axpy(y, h * a31, k1), h * a32, k2);
    const DPState k3 = rhs(t + c3 * h, tmp);
    tmp = axpy(axpy(axpy(y, h * a41, k1), h * a42, k2), h * a43, k3);
    const DPState k4 = rhs(t + c4 * h, tmp);
    tmp = axpy(axpy(axpy(axpy(y, h * a51, k1), h * a52, k2), h * a53, k3),
               h * a54, k4);
    const DPState k5 = rhs(t + c5 * h, tmp);
    tmp = axpy(axpy(axpy(axpy(axpy(y, h * a61, k1), h * a62, k2), h * a63, k3),
                    h * a64, k4),
               h * a65, k5);
    const DPState k6 = rhs(t + h, tmp);
    DPState ynew{
        y.y0 + h * (b1 * k1.y0 + b3 * k3.y0 + b4 * k4.y0 + b5 * k5.y0 +
                    b6 * k6.y0),
        y.y1 + h * (b1 * k1.y1 + b3 * k3.y1 + b4 * k4.y1 + b5 * k5.y1 +
                    b6 * k6.y1)};
    const DPState k7 = rhs(t + h, ynew);
    const Complex err0 = h * (e1 * k1.y0 + e3 * k3.y0 + e4 * k4.y0 +
                              e5 * k5.y0 + e6 * k6.y0 + e7 * k7.y0);
    const Complex err1 = h * (e1 * k1.y1 + e3 * k3.y1 + e4 * k4.y1 +
                              e5 * k5.y1 + e6 * k6.y1 + e7 * k7.y1);
    const double scale =
        std::max({std::abs(y.y0), std::abs(y.y1), std::abs(ynew.y0),
                  std::abs(ynew.y1), kTinyFloor});
    const double err = std::max(std::abs(err0), std::abs(err1)) / scale / rtol;
    if (err <= 1.0) {
      t += h;
      y = ynew;
      const double mag = std::max(std::abs(y.y0), std::abs(y.y1));
      if (mag > 1e100) {
        y.y0 /= mag;
        y.y1 /= mag;
        log_scale += std::log(mag);
      }
    }
    h *= std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
  }
  return {y.y0, y.y1 / ray, log_scale, s0.error.terms_used};
}

// N (value, derivative wrt z, log-scale) at z on a ray, choosing direct
// series or series+propagation.
struct NAt {
  Complex value, deriv;
  double log_scale;
  double cancellation;
};

NAt n_at(const HeunParams& p, Complex ray, double radius, double tol,
         const HeunOptions& opt) {
  if (radius <= opt.series_domain) {
    // Prefer the direct series when its measured cancellation is benign;
    // overflow or excess cancellation falls through to propagation.
    try {
      HeunOptions local = opt;
      local.cancellation_limit = 1e290;
      const SeriesResult s = eval_N(p, radius * ray, tol, local);
      if (s.error.cancellation * kEps <= 0.02 * tol) {
        return {s.value, s.derivative, 0.0, s.error.cancellation};
      }
    } catch (const NumericError&) {
      // fall through
    }
  }
  const PropagatedN pr = propagate_N(p, ray, radius, tol, opt);
  return {pr.value, pr.deriv, pr.log_scale, 1.0};
}

}  // namespace

SeriesResult eval_N_auto(const HeunParams& p, Complex z, double tol,
                         const HeunOptions& opt) {
  const double radius = std::abs(z);
  if (radius == 0.0) return eval_N(p, z, tol, opt);
  const NAt n = n_at(p, z / radius, radius, tol, opt);
  if (n.log_scale > 690.0) {
    throw NumericError("eval_N_auto: result exponent overflows double range");
  }
  const double s = std::exp(n.log_scale);
  SeriesResult out;
  out.value = n.value * s;
  out.derivative = n.deriv * s;
  out.error.cancellation = n.cancellation;
  out.error.relative = std::max(tol, n.cancellation * kEps);
  out.error.absolute =
      out.error.relative * std::max(std::abs(out.value), kTinyFloor);
  return out;
}

SeriesResult eval_Bplus(const HeunParams& p, Complex z, int max_terms) {
  const ScaledPair sp = scaled_B(p, z, max_terms);
  if (sp.rel_trunc > 1.0) {
    throw NumericError("eval_Bplus: asymptotic regime unreachable at this z");
  }
  return unscale(sp);
}

SeriesResult eval_Hplus(const HeunParams& p, Complex z, int max_terms) {
  const ScaledPair sp = scaled_H(p, z, max_terms);
  if (sp.rel_trunc > 1.0) {
    throw NumericError("eval_Hplus: asymptotic regime unreachable at this z");
  }
  return unscale(sp);
}

std::vector<Complex> bplus_coefficients(int l, Complex lambda, int count) {
  const HeunParams p = heun_family(l, lambda);
  const Complex sig = 0.5 * (p.gamma_h - p.alpha_h - 2.0);
  std::vector<Complex> cs{Complex(1.0)};
  for (int n = 1; n < count; ++n) {
    cs.push_back(((p.beta_h * (sig + 1.0 - double(n)) +
                   0.5 * p.beta_h * (1.0 + p.alpha_h)) *
                      cs[n - 1] -
                  (sig + 2.0 - double(n)) *
                      (sig + 2.0 - double(n) + p.alpha_h) *
                      (n >= 2 ? cs[n - 2] : Complex(0.0))) /
                 (2.0 * n));
  }
  return cs;
}

std::vector<Complex> hplus_coefficients(int l, Complex lambda, int count) {
  const HeunParams p = heun_family(l, lambda);
  const Complex sig = -0.5 * (2.0 + p.alpha_h + p.gamma_h);
  std::vector<Complex> cs{Complex(1.0)};
  for (int n = 1; n < count; ++n) {
    cs.push_back(((p.beta_h * (sig + 1.0 - double(n)) +
                   0.5 * p.beta_h * (1.0 + p.alpha_h)) *
                      cs[n - 1] +
                  (sig + 2.0 - double(n)) *
                      (sig + 2.0 - double(n) + p.alpha_h) *
                      (n >= 2 ? cs[n - 2] : Complex(0.0))) /
                 (2.0 * n));
  }
  return cs;
}

namespace {

struct MatchingAttempt {
  Complex k1, k2;
  double lg_k1, lg_k2;  // actual K_i = k_i * exp(lg_k_i)
  double condition;
  double rel_trunc;
};

MatchingAttempt match_at(const HeunParams& p, Complex ray, double radius,
                         double tol, const HeunOptions& opt) {
  const NAt n = n_at(p, ray, radius, tol, opt);
  const Complex z = radius * ray;
  const ScaledPair B = scaled_B(p, z, opt.asymptotic_max_terms);
  const ScaledPair H = scaled_H(p, z, opt.asymptotic_max_terms);
  // Solve [Bv Hv; Bd Hd] (k1, k2)^T = (Nv, Nd)^T on the stripped scale.
  const Complex det = B.value * H.deriv - B.deriv * H.value;
  if (std::abs(det) == 0.0) {
    throw NumericError("connection_by_matching: singular matching system");
  }
  MatchingAttempt out;
  out.k1 = (n.value * H.deriv - n.deriv * H.value) / det;
  out.k2 = (B.value * n.deriv - B.deriv * n.value) / det;
  out.lg_k1 = n.log_scale - B.log_scale;
  out.lg_k2 = n.log_scale - H.log_scale;
  const double norm_m =
      std::sqrt(std::norm(B.value) + std::norm(H.value) + std::norm(B.deriv) +
                std::norm(H.deriv));
  out.condition = norm_m * norm_m / std::abs(det);  // Frobenius-based bound
  out.rel_trunc = std::max(B.rel_trunc, H.rel_trunc);
  return out;
}

Complex apply_scale(Complex mantissa, double lg, const char* what) {
  if (lg > 700.0 || lg < -745.0) {
    throw NumericError(std::string(what) +
                       ": connection coefficient exponent overflows double "
                       "(log-scale " + std::to_string(lg) + ")");
  }
  return mantissa * std::exp(lg);
}

}  // namespace

ConnectionPair connection_by_matching(const HeunParams& p, double ray_angle,
                                      double tol, const HeunOptions& opt) {
  const Complex ray = std::exp(Complex(0.0, ray_angle));
  const double lam_mag = 0.5 * std::abs(p.beta_h);
  const double r_hi = std::max(opt.match_radius_hi, 3.2 * lam_mag + 2.0);
  const double r_lo = opt.match_radius_lo;

  // Scan a geometric grid of candidate radii; score each by the asymptotic
  // truncation bound plus a cancellation-growth model for the series side
  // (exp(4|lambda| r) on the real ray; radius-independent once propagation
  // takes over on the oscillatory ray).
  const int n_cand = 24;
  double best_score = std::numeric_limits<double>::infinity();
  double best_r = -1.0;
  const bool real_ray =
      std::abs(std::remainder(ray_angle, 2 * 3.14159265358979324)) < 1e-12;
  // Series-side error is bounded by construction (the start radius of the
  // propagation adapts to measured cancellation), but on the real ray it
  // still grows with |lambda| through the unavoidable exp(4|lambda| z0)
  // factor at the smallest usable start radius.
  const double series_floor =
      real_ray ? kEps * std::exp(std::min(4.0 * lam_mag * std::min(4.0, r_lo),
                                          600.0))
               : kEps;
  for (int i = 0; i < n_cand; ++i) {
    const double r = r_lo * std::pow(r_hi / r_lo, double(i) / (n_cand - 1));
    const Complex z = r * ray;
    const AsympSum bs = b_sum(p, z, opt.asymptotic_max_terms);
    const AsympSum hs = h_sum(p, z, opt.asymptotic_max_terms);
    const double score = bs.rel_trunc + hs.rel_trunc + series_floor;
    if (score < best_score) {
      best_score = score;
      best_r = r;
    }
  }
  if (best_r < 0 || best_score > tol * 1e3) {
    throw NumericError(
        "connection_by_matching: no matching radius satisfies both the "
        "series and asymptotic accuracy criteria (best score " +
        std::to_string(best_score) + ")");
  }

  const MatchingAttempt m = match_at(p, ray, best_r, tol, opt);
  const double r_check = real_ray
                             ? std::max(best_r * 0.85, r_lo)
                             : std::min(best_r * 1.15, r_hi * 1.2);
  const MatchingAttempt mc = match_at(p, ray, r_check, tol, opt);
  const Complex k2_a = apply_scale(m.k2, m.lg_k2, "connection_by_matching");
  const Complex k2_b = apply_scale(mc.k2, mc.lg_k2, "connection_by_matching");

  // When |K2| << eps |K1| the matching system cannot resolve K2 at all (the
  // dominant branch swamps it); its drift is then meaningless, so the
  // stability check falls back to K1 and the K2 error is pinned at the
  // resolution limit eps |K1| / |K2|.
  const double ln_k2 = std::log(std::max(std::abs(m.k2), kTinyFloor)) + m.lg_k2;
  const double ln_k1 = std::log(std::max(std::abs(m.k1), kTinyFloor)) + m.lg_k1;
  const bool k2_resolvable = ln_k2 >= ln_k1 + std::log(64.0 * kEps);
  double drift;
  double resolution_limit = 0.0;
  if (k2_resolvable) {
    drift = std::abs(k2_a - k2_b) / std::max(std::abs(k2_a), kTinyFloor);
  } else {
    const Complex k1_a = apply_scale(m.k1, m.lg_k1, "connection_by_matching");
    const Complex k1_b = apply_scale(mc.k1, mc.lg_k1, "connection_by_matching");
    drift = std::abs(k1_a - k1_b) / std::max(std::abs(k1_a), kTinyFloor);
    resolution_limit = std::min(kEps * std::exp(ln_k1 - ln_k2), 1.0);
  }
  if (drift > 10.0 * tol) {
    throw NumericError(
        "connection_by_matching: connection coefficients unstable under "
        "matching-radius change (relative drift " + std::to_string(drift) +
        ")");
  }

  ConnectionPair out;
  out.k1 = apply_scale(m.k1, m.lg_k1, "connection_by_matching");
  out.k2 = k2_a;
  out.condition = std::max(1.0, m.condition);
  out.error.relative = std::max({drift, m.rel_trunc, resolution_limit});
  out.error.absolute = out.error.relative * std::abs(out.k2);
  out.error.terms_used = 0;
  out.error.cancellation = 1.0;
  return out;
}

std::pair<Complex, ErrorEstimate> K2_integral(const HeunParams& p, double tol,
                                              const HeunOptions& opt) {
  // K2(a,b,g,d) = Gamma(1+a)/[Gamma((a-g)/2) Gamma(1+(a+g)/2)] * J, with
  // J = int_0^inf x^{s-1} e^{-x^2-bx} N(a',b,g',d'; x) dx,
  // s = 1+(a+g)/2, a' = (a+g)/2, g' = (3a-g)/2, d' = d + b(g-a)/2.
  const Complex a = p.alpha_h, b = p.beta_h, g = p.gamma_h, d = p.delta_h;
  const Complex s = 1.0 + 0.5 * (a + g);
  HeunParams inner{0.5 * (a + g), b, 0.5 * (3.0 * a - g), d + 0.5 * b * (g - a)};

  // Integrand tail ~ K2' x^{P}, P = (g-a)/2 - 1; the integral converges only
  // for Re P < -1.
  const Complex P = 0.5 * (g - a) - 1.0;
  if (P.real() >= -1.0) {
    throw NumericError("K2_integral: divergent integrand tail (Re[(g-a)/2] >= 0)");
  }

  // Prefactor; a pole of a denominator Gamma forces K2 = 0.
  Complex log_pref;
  bool pref_zero = false;
  try {
    log_pref = ln_gamma(1.0 + a) - ln_gamma(0.5 * (a - g)) -
               ln_gamma(1.0 + 0.5 * (a + g));
  } catch (const NumericError&) {
    pref_zero = true;
  }
  if (pref_zero) {
    ErrorEstimate err;
    err.absolute = tol;
    err.relative = 0.0;
    return {Complex(0.0), err};
  }
  const Complex pref = std::exp(log_pref);

  // Truncation point: far enough that the quadrature tail is algebraic-only,
  // near enough that the inner series cancellation stays benign.
  const double bmag = std::abs(b);
  double X = 7.0;
  if (bmag > 0) X = std::min(X, 15.0 / bmag);
  X = std::max(X, 4.0);

  HeunOptions inner_opt = opt;
  inner_opt.cancellation_limit = 1e290;
  auto integrand = [&](double x) -> Complex {
    if (x <= 0.0) return Complex(0.0);
    const SeriesResult nv = eval_N(inner, Complex(x), 1e-15, inner_opt);
    return std::exp((s - 1.0) * std::log(Complex(x)) - x * x - b * x) *
           nv.value;
  };
  auto [quad, quad_err] = adaptive_quadrature(integrand, 0.0, X, 0.1 * tol);
  // The inner series loses ~ e^{2|b|x} to cancellation, but that noise
  // enters the integral damped by the integrand magnitude; estimate the
  // floor from the worst point, x = X.
  const double noise_floor = kEps * std::exp(std::min(2.0 * bmag * X, 600.0)) *
                             std::abs(integrand(X)) * X;
  quad_err.absolute += noise_floor;

  // Algebraic tail: the H+ component of the inner solution survives the
  // exponential damping; tail_n = K2' e'_n X^{P-n+1}/(n-1-P).
  const ConnectionPair inner_conn = connection_by_matching(inner, 0.0, 1e-9, opt);
  const Complex sigH = -0.5 * (2.0 + inner.alpha_h + inner.gamma_h);
  std::vector<Complex> es{Complex(1.0)};
  for (int n = 1; n < opt.asymptotic_max_terms; ++n) {
    es.push_back(((inner.beta_h * (sigH + 1.0 - double(n)) +
                   0.5 * inner.beta_h * (1.0 + inner.alpha_h) -
                   0.5 * inner.delta_h) *
                      es[n - 1] +
                  (sigH + 2.0 - double(n)) *
                      (sigH + 2.0 - double(n) + inner.alpha_h) *
                      (n >= 2 ? es[n - 2] : Complex(0.0))) /
                 (2.0 * n));
  }
  Complex tail = 0.0;
  double min_term = std::numeric_limits<double>::infinity();
  double tail_err = 0.0;
  for (std::size_t n = 0; n < es.size(); ++n) {
    const Complex t = inner_conn.k2 * es[n] *
                      std::exp((P - double(n) + 1.0) * std::log(X)) /
                      (double(n) - 1.0 - P);
    const double mag = std::abs(t);
    if (mag >= min_term) {  // optimal truncation of the tail series
      tail_err = mag;
      break;
    }
    tail += t;
    min_term = mag;
  }

  const Complex value = pref * (quad + tail);
  ErrorEstimate err;
  err.absolute = std::abs(pref) * (quad_err.absolute + tail_err) +
                 std::abs(pref * tail) * inner_conn.error.relative;
  err.relative = err.absolute / std::max(std::abs(value), kTinyFloor);
  err.terms_used = quad_err.terms_used;
  if (err.relative > tol * 10.0) {
    throw NumericError("K2_integral: could not reach the requested tolerance");
  }
  return {value, err};
}

namespace {

// Regular series value/derivative at real z in MPFR arithmetic; `digits`
// must cover the summation cancellation ~ exp(z^2 + 2|lambda| z).
void big_series_N(int l, double lambda, double zv, double digits,
                  mpfr_prec_t prec, BigReal& val, BigReal& dval) {
  const double lam_mag = std::abs(lambda);
  const BigReal a(4.0 * l + 2.0, prec), b(2.0 * lambda, prec);
  const BigReal g(lambda * lambda, prec);
  const BigReal z(zv, prec);
  const BigReal one(1.0, prec), zero(0.0, prec);
  const BigReal half_src = BigReal(0.5, prec) * b * (one + a);

  BigReal cm1 = zero, c = one, zp = one;
  val = zero;
  dval = zero;
  const BigReal tol_big = exp(BigReal(-(digits - 10.0) * std::log(10.0), prec));
  int streak = 0;
  bool converged = false;
  // Reaching a tail below 10^-digits needs n with n ln(n/z^2) ~ digits ln 10
  // past the hump at n ~ z^2; a generous linear bound is cheap here.
  const int nmax =
      400 + int(40.0 * zv * zv + 20.0 * lam_mag * zv + 8.0 * digits);
  for (int n = 0; n < nmax; ++n) {
    const BigReal term = c * zp;
    val += term;
    if (n >= 1) dval += BigReal(double(n), prec) * term / z;
    BigReal cn = (b * BigReal(double(n), prec) + half_src) * c -
                 (g - a - BigReal(2.0 * n, prec)) * cm1;
    cn /= BigReal(double(n + 1), prec) * (BigReal(double(n + 1), prec) + a);
    cm1 = c;
    c = cn;
    zp *= z;
    if (abs(term) <= tol_big * abs(val)) {
      if (++streak >= 3) {
        converged = true;
        break;
      }
    } else {
      streak = 0;
    }
  }
  if (!converged) {
    throw NumericError("big_series_N: series term cap reached");
  }
}

}  // namespace

std::pair<int, double> k2_bound_ray_sign_log(int l, double lambda) {
  const BoundRayConnection c = bound_ray_connection(l, lambda);
  return {c.k2_sign, c.ln_abs_k2};
}

std::pair<double, double> n_bound_ray(int l, double lambda, double z) {
  if (!(z > 0)) throw NumericError("n_bound_ray: requires z > 0");
  const double lam_mag = std::abs(lambda);
  const double digits =
      (z * z + 2.0 * lam_mag * z) / std::log(10.0) + 30.0;
  const mpfr_prec_t prec = mpfr_prec_t(digits * 3.3219280948873623) + 64;
  BigReal val(prec), dval(prec);
  big_series_N(l, lambda, z, digits, prec, val, dval);
  return {val.to_double(), dval.to_double()};
}

BoundRayConnection bound_ray_connection(int l, double lambda) {
  if (!(lambda < 0)) {
    throw NumericError("bound_ray_connection: requires lambda < 0 (bound ray)");
  }
  const double lam_mag = -lambda;
  const double zm = std::max(9.0, 2.7 * lam_mag);
  // Working precision covers the series-summation cancellation
  // exp(zm^2 + 2|lambda| zm) and the recessive-extraction loss
  // exp(4|lambda| zm), which compound.
  const double digits =
      (zm * zm + 6.0 * lam_mag * zm) / std::log(10.0) + 40.0;
  if (digits > 40000.0) {
    throw NumericError(
        "bound_ray_connection: required working precision (" +
        std::to_string(int(digits)) + " digits) exceeds the supported cap");
  }
  const mpfr_prec_t prec = mpfr_prec_t(digits * 3.3219280948873623) + 64;

  const double ah = 4.0 * l + 2.0;
  const BigReal a(ah, prec), b(2.0 * lambda, prec);
  const BigReal g(lambda * lambda, prec);
  const BigReal z(zm, prec);
  const BigReal one(1.0, prec), zero(0.0, prec);

  BigReal val(prec), dval(prec);
  big_series_N(l, lambda, zm, digits, prec, val, dval);

  // Stripped asymptotic sums with optimal truncation (real arithmetic).
  auto asum = [&](const BigReal& sig, bool is_h, BigReal& s_out, BigReal& sd_out) {
    std::vector<BigReal> cs{one};
    std::vector<BigReal> mags{one};
    BigReal minm = one;
    const BigReal big_ratio = exp(BigReal(15.0 * std::log(10.0), prec));
    for (int n = 1; n < 300; ++n) {
      const BigReal nb(double(n), prec);
      BigReal cc = (b * (sig + one - nb) + BigReal(0.5, prec) * b * (one + a)) *
                   cs[n - 1];
      const BigReal cross =
          (sig + BigReal(2.0, prec) - nb) * (sig + BigReal(2.0, prec) - nb + a) *
          (n >= 2 ? cs[n - 2] : zero);
      cc = is_h ? cc + cross : cc - cross;
      cc /= BigReal(2.0 * n, prec);
      cs.push_back(cc);
      BigReal m = abs(cc);
      for (int i = 0; i < n; ++i) m /= z;
      mags.push_back(m);
      if (m < minm) minm = m;
      if (m > minm * big_ratio) break;
    }
    std::size_t n_opt = 1;
    for (std::size_t i = 1; i < mags.size(); ++i) {
      if (mags[i] < mags[n_opt]) n_opt = i;
    }
    s_out = zero;
    sd_out = zero;
    BigReal zpw = one;
    for (std::size_t n = 0; n < n_opt; ++n) {
      s_out += cs[n] / zpw;
      if (n >= 1) sd_out -= BigReal(double(n), prec) * cs[n] / (zpw * z);
      zpw *= z;
    }
  };
  const BigReal sigB = (g - a - BigReal(2.0, prec)) / BigReal(2.0, prec);
  const BigReal sigH = -(BigReal(2.0, prec) + a + g) / BigReal(2.0, prec);
  BigReal sB = zero, sBd = zero, sH = zero, sHd = zero;
  asum(sigB, false, sB, sBd);
  asum(sigH, true, sH, sHd);
  const BigReal Bv = sB, Bd = sigB / z * sB + sBd;
  const BigReal Hv = sH, Hd = (sigH / z + b + BigReal(2.0, prec) * z) * sH + sHd;

  const BigReal det = Bv * Hd - Bd * Hv;
  const BigReal k2 = (Bv * dval - Bd * val) / det;
  const BigReal k1 = (val * Hd - dval * Hv) / det;
  BoundRayConnection out;
  // Actual K1 = k1 * exp(-lgB), lgB = sigB ln z (B's stripped prefactor);
  // actual K2 = k2 * exp(-lgH), lgH = sigH ln z + b z + z^2.
  out.k1 = (k1 * exp(-(sigB * log(z)))).to_double();
  const BigReal lgH = sigH * log(z) + b * z + z * z;
  out.k2_sign = k2.sign();
  out.ln_abs_k2 = (out.k2_sign == 0)
                      ? -std::numeric_limits<double>::infinity()
                      : (log(abs(k2)) - lgH).to_double();
  return out;
}

}  // namespace sqrtpot
