#include "sqrtpot/oracle.hpp"

#include <cmath>
#include <vector>

namespace sqrtpot {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kRescale = 1e100;

double f_coeff(double alpha, int l, double energy, double r) {
  return double(l) * (l + 1) / (r * r) - alpha / std::sqrt(r) - energy;
}

// Raw Numerov sweep storing u on the uniform grid; u'' = f u, advanced via
// w_n = (1 - h^2 f_n / 12) u_n,  w_{n+1} = 2 w_n - w_{n-1} + h^2 f_n u_n.
// Rescales everything stored when |u| exceeds 1e100.
double numerov_sweep(double alpha, int l, double energy, double r0, double h,
                     long n_steps, double u0, double u1,
                     std::vector<double>& u) {
  u.assign(n_steps + 1, 0.0);
  u[0] = u0;
  if (n_steps >= 1) u[1] = u1;
  double log_scale = 0.0;
  const double h2 = h * h;
  double f_prev = f_coeff(alpha, l, energy, r0);
  double f_curr = f_coeff(alpha, l, energy, r0 + h);
  double w_prev = (1.0 - h2 * f_prev / 12.0) * u0;
  double w_curr = (1.0 - h2 * f_curr / 12.0) * u1;
  for (long i = 1; i < n_steps; ++i) {
    const double w_next = 2.0 * w_curr - w_prev + h2 * f_curr * u[i];
    const double r_next = r0 + (i + 1) * h;
    const double f_next = f_coeff(alpha, l, energy, r_next);
    const double u_next = w_next / (1.0 - h2 * f_next / 12.0);
    u[i + 1] = u_next;
    w_prev = w_curr;
    w_curr = w_next;
    f_prev = f_curr;
    f_curr = f_next;
    if (std::abs(u_next) > kRescale) {
      const double m = std::abs(u_next);
      for (long j = 0; j <= i + 1; ++j) u[j] /= m;
      w_prev /= m;
      w_curr /= m;
      log_scale += std::log(m);
    }
  }
  return log_scale;
}

// Fourth-order derivative on the grid: u' = (u_+ - u_-)/(2h) - (h^2/6) *
// [(f u)_+ - (f u)_-]/(2h), from the Taylor expansion with u''' = (f u)'.
double deriv4(double alpha, int l, double energy, double r, double h,
              double um, double up) {
  const double fu_p = f_coeff(alpha, l, energy, r + h) * up;
  const double fu_m = f_coeff(alpha, l, energy, r - h) * um;
  return (up - um) / (2.0 * h) - (h * h / 6.0) * (fu_p - fu_m) / (2.0 * h);
}

// Frobenius expansion near the origin: u = r^{l+1}(1 + c3 r^{3/2} + ...),
// with c3 = -4 alpha / (12 l + 15); the r^{1/2} and r coefficients vanish.
double small_r_seed(double alpha, int l, double r) {
  const double c3 = -4.0 * alpha / (12.0 * l + 15.0);
  return std::pow(r, double(l + 1)) * (1.0 + c3 * r * std::sqrt(r));
}

double outer_turning(double alpha, int l, double kappa) {
  auto fpot = [&](double r) {
    return kappa * kappa + double(l) * (l + 1) / (r * r) - alpha / std::sqrt(r);
  };
  double inside = -1.0;
  for (int i = 0; i <= 400; ++i) {
    const double r = std::pow(10.0, -3.0 + 12.0 * i / 400.0);
    if (fpot(r) < 0.0) inside = r;
  }
  if (inside < 0.0) {
    throw NumericError("shoot_bound_state: no classically allowed region");
  }
  return find_root_bracketed(fpot, inside, 1e12, 1e-10 * inside);
}

// Normalized log-derivative mismatch at the outer turning point.
double shooting_mismatch(double alpha, int l, double kappa, double h) {
  const double energy = -kappa * kappa;
  const double r_tp = outer_turning(alpha, l, kappa);
  const double r0 = 1e-6;
  const double r_end_raw = r_tp + 50.0 / kappa;
  const long i_tp = long(std::lround((r_tp - r0) / h));
  const long n_out = i_tp + 1;
  std::vector<double> uo;
  numerov_sweep(alpha, l, energy, r0, h, n_out, small_r_seed(alpha, l, r0),
                small_r_seed(alpha, l, r0 + h), uo);
  const double r_m = r0 + i_tp * h;
  const double duo = deriv4(alpha, l, energy, r_m, h, uo[i_tp - 1], uo[i_tp + 1]);

  // Inward sweep (negative step) seeded with the decaying asymptotic form,
  // normalized at r_end to avoid underflow.
  const long n_in = long(std::lround((r_end_raw - r_m) / h)) + 1;
  const double r_end = r_m + n_in * h;
  auto ln_seed = [&](double r) {
    return -kappa * r + (alpha / kappa) * std::sqrt(r) +
           alpha * alpha / (8.0 * kappa * kappa * kappa) *
               std::log(2.0 * kappa * r);
  };
  const double ln0 = ln_seed(r_end);
  std::vector<double> ui;
  numerov_sweep(alpha, l, energy, r_end, -h, n_in + 1, 1.0,
                std::exp(ln_seed(r_end - h) - ln0), ui);
  const long j_m = n_in;  // index of r_m in the inward array
  const double dui = -deriv4(alpha, l, energy, r_m, h, ui[j_m - 1], ui[j_m + 1]);

  const double num = duo * ui[j_m] - uo[i_tp] * dui;
  const double den =
      std::abs(duo * ui[j_m]) + std::abs(uo[i_tp] * dui) + kTinyFloor;
  return num / den;
}

}  // namespace

IntegrationResult integrate_radial(double alpha, int l, double energy,
                                   const IntegrationGrid& grid,
                                   std::pair<double, double> init) {
  if (!(grid.r_start > 0.0) || !(grid.r_start < grid.r_end) ||
      !(grid.step > 0.0) ||
      grid.step > (grid.r_end - grid.r_start) / 100.0) {
    throw NumericError(
        "integrate_radial: invalid grid (need 0 < r_start < r_end and "
        "step <= span/100)");
  }
  const long n = long(std::floor((grid.r_end - grid.r_start) / grid.step));
  std::vector<double> u;
  const double log_scale =
      numerov_sweep(alpha, l, energy, grid.r_start, grid.step, n, init.first,
                    init.second, u);
  IntegrationResult out;
  out.log_scale = log_scale;
  out.points.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = grid.r_start + double(i) * grid.step;
    out.points[i].r = r;
    out.points[i].u = Complex(u[i], 0.0);
    double du;
    if (i == 0) {
      du = (u.size() > 1) ? (u[1] - u[0]) / grid.step : 0.0;
    } else if (i + 1 == u.size()) {
      du = (u[i] - u[i - 1]) / grid.step;
    } else {
      du = deriv4(alpha, l, energy, r, grid.step, u[i - 1], u[i + 1]);
    }
    out.points[i].du_dr = Complex(du, 0.0);
  }
  return out;
}

OracleResult shoot_bound_state(double alpha, int l,
                               std::pair<double, double> kappa_bracket) {
  const auto [lo, hi] = kappa_bracket;
  if (!(lo > 0.0) || !(lo < hi)) {
    throw NumericError("shoot_bound_state: invalid kappa bracket");
  }
  auto solve = [&](double h) {
    auto m = [&](double kappa) { return shooting_mismatch(alpha, l, kappa, h); };
    return find_root_bracketed(m, lo, hi, 1e-12 * lo);
  };
  const double h1 = 1e-3;
  const double k_h = solve(h1);
  const double k_h2 = solve(0.5 * h1);
  OracleResult out;
  out.value = k_h2;
  out.convergence_pairs = {{h1, k_h}, {0.5 * h1, k_h2}};
  return out;
}

int oracle_node_count(double alpha, int l, double kappa) {
  const double energy = -kappa * kappa;
  const double r_tp = outer_turning(alpha, l, kappa);
  const double r0 = 1e-6;
  const double h = 1e-3;
  const long n = long(std::lround((r_tp - r0) / h));
  std::vector<double> u;
  numerov_sweep(alpha, l, energy, r0, h, n, small_r_seed(alpha, l, r0),
                small_r_seed(alpha, l, r0 + h), u);
  int nodes = 0;
  double prev = 0.0;
  for (long i = 1; i <= n; ++i) {
    if (prev != 0.0 && u[i] * prev < 0.0) ++nodes;
    if (u[i] != 0.0) prev = u[i];
  }
  return nodes;
}

OracleResult extract_phase_shift(double alpha, int l, double k, double r_match,
                                 PhaseForm form) {
  if (!(k > 0.0) || !(r_match > 10.0 / k)) {
    throw NumericError("extract_phase_shift: r_match too small for this k");
  }
  const double energy = k * k;
  const double r0 = 1e-6;
  const double h = (k < 0.3) ? 0.012 : std::min(5e-4, 0.003 / k);
  const double quarter = kPi / (2.0 * k);
  const double r_total = 2.0 * r_match + 2.0 * quarter + 1.0;
  const long n = long(std::lround((r_total - r0) / h));
  std::vector<double> u;
  numerov_sweep(alpha, l, energy, r0, h, n, small_r_seed(alpha, l, r0),
                small_r_seed(alpha, l, r0 + h), u);

  auto phase_ref = [&](double r) {
    switch (form) {
      case PhaseForm::kShortRange:
        return k * r;
      case PhaseForm::kTheta:
        return k * r + (alpha / k) * std::sqrt(r) -
               alpha * alpha / (8.0 * k * k * k) * std::log(r);
      case PhaseForm::kThetaRefined:
      default: {
        const double a = alpha;
        return k * r + (a / k) * std::sqrt(r) -
               a * a / (8.0 * k * k * k) * std::log(r) -
               std::pow(a, 3) / (8.0 * std::pow(k, 5)) / std::sqrt(r) +
               (5.0 * std::pow(a, 4) / (128.0 * std::pow(k, 7)) +
                double(l) * (l + 1) / (2.0 * k)) /
                   r;
      }
    }
  };
  auto extract_at = [&](double rm) {
    const long i1 = long(std::lround((rm - r0) / h));
    const long i2 = i1 + long(std::lround(quarter / h));
    const double r1 = r0 + i1 * h, r2 = r0 + i2 * h;
    const double t1 = phase_ref(r1), t2 = phase_ref(r2);
    const double phi = std::atan2(u[i1] * std::sin(t2) - u[i2] * std::sin(t1),
                                  u[i2] * std::cos(t1) - u[i1] * std::cos(t2));
    return std::remainder(phi + l * kPi / 2.0, kPi);
  };
  const double d1 = extract_at(r_match);
  double d2 = extract_at(2.0 * r_match);
  d2 = d1 + std::remainder(d2 - d1, kPi);  // align mod pi for differencing
  const double drift = std::abs(d2 - d1);
  if (form != PhaseForm::kShortRange && drift > 1e-3) {
    throw NumericError(
        "extract_phase_shift: phases at r_match and 2 r_match differ by " +
        std::to_string(drift) + " rad (increase r_match)");
  }
  OracleResult out;
  if (form == PhaseForm::kThetaRefined) {
    // The leading reference-phase residual decays like r^{-3/2}.
    out.value = std::remainder(
        d2 + (d2 - d1) / (std::pow(2.0, 1.5) - 1.0), kPi);
  } else {
    out.value = std::remainder(d2, kPi);
  }
  out.convergence_pairs = {{r_match, d1}, {2.0 * r_match, d2}};
  return out;
}

}  // namespace sqrtpot
