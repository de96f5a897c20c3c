#include "sqrtpot/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "sqrtpot/parallel.hpp"

namespace sqrtpot {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

double lambda_bound(double alpha, double kappa) {
  return -alpha / std::sqrt(2.0 * kappa * kappa * kappa);
}

// Sharp-cutoff semiclassical level-count estimate n(kappa) ~ alpha^2/(4 kappa^3),
// used only to size the scan grid (zeros accumulate at kappa -> 0).
double level_count_estimate(double alpha, double lo, double hi) {
  return 0.25 * alpha * alpha * (1.0 / (lo * lo * lo) - 1.0 / (hi * hi * hi));
}

double coulomb_like_constant(double alpha, double k) {
  return alpha * alpha / (8.0 * k * k * k);
}

// Raw (mod-pi ambiguous) phase shift at one k from the dominant connection
// coefficient; see the phase_shift doc comment.
double raw_delta(double alpha, int l, double k) {
  if (alpha == 0.0) return 0.0;
  PhysicalConfig cfg{alpha, l, Complex(k, 0.0)};
  const ParamMap pm = map_params(cfg);
  const ConnectionPair conn =
      connection_by_matching(pm.params, -kPi / 4.0, 1e-9);
  const double arg_k1 = std::arg(conn.k1);
  return arg_k1 + (l + 1) * kPi -
         coulomb_like_constant(alpha, k) * std::log(2.0 * k);
}

}  // namespace

std::vector<SpectrumEntry> bound_spectrum(double alpha, int l,
                                          std::pair<double, double> kappa_range,
                                          int max_levels) {
  const double lo = kappa_range.first, hi = kappa_range.second;
  if (!(lo > 0.0) || !(lo < hi)) {
    throw NumericError("bound_spectrum: requires 0 < kappa_min < kappa_max");
  }
  if (l < 0) throw NumericError("bound_spectrum: l must be >= 0");
  if (!(alpha >= 0.0)) throw NumericError("bound_spectrum: alpha must be >= 0");
  if (alpha == 0.0) return {};  // free particle: no bound states

  // Log grid, densified so the expected level spacing is resolved.
  const double decades = std::log10(hi / lo);
  const double est = level_count_estimate(alpha, lo, hi);
  const int npts = std::max({int(std::ceil(200.0 * decades)),
                             int(std::ceil(12.0 * est)), 8});
  std::vector<double> grid(npts + 1);
  for (int i = 0; i <= npts; ++i) {
    grid[i] = lo * std::pow(hi / lo, double(i) / npts);
  }

  struct Eval {
    int sign = 0;
    double ln_abs = 0.0;
  };
  std::vector<Eval> f(grid.size());
  parallel_for(int(grid.size()), [&](int i) {
    const auto [s, ln] = k2_bound_ray_sign_log(l, lambda_bound(alpha, grid[i]));
    f[i] = {s, ln};
  });

  std::vector<SpectrumEntry> found;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (f[i].sign == 0) continue;  // exact grid hit handled by neighbor pass
    if (f[i].sign * f[i + 1].sign >= 0) continue;
    const double offset = std::max(f[i].ln_abs, f[i + 1].ln_abs);
    auto g = [&](double kappa) {
      const auto [s, ln] = k2_bound_ray_sign_log(l, lambda_bound(alpha, kappa));
      if (s == 0) return 0.0;
      return double(s) * std::exp(std::clamp(ln - offset, -600.0, 600.0));
    };
    const double tol = 1e-13 * 0.5 * (grid[i] + grid[i + 1]);
    const double root = find_root_bracketed(g, grid[i], grid[i + 1], tol);
    SpectrumEntry e;
    e.kappa = root;
    e.energy = -root * root;
    const auto [rs, rln] =
        k2_bound_ray_sign_log(l, lambda_bound(alpha, root));
    e.residual = (rs == 0) ? 0.0 : std::exp(std::min(rln, 700.0));
    e.bracket_width = tol;
    found.push_back(e);
  }

  std::sort(found.begin(), found.end(),
            [](const SpectrumEntry& a, const SpectrumEntry& b) {
              return a.kappa > b.kappa;
            });
  if (max_levels > 0 && int(found.size()) > max_levels) {
    found.resize(max_levels);
  }
  for (std::size_t i = 0; i < found.size(); ++i) found[i].n = int(i) + 1;
  return found;
}

namespace {

// Unnormalized bound u(r): extended-precision regular series below the
// switch radius, K1 times the optimally truncated B+ asymptotic form above.
double bound_u_raw(const BoundState& st, double r) {
  const double kappa = st.entry.kappa;
  const double expo = -kappa * r + (st.alpha / kappa) * std::sqrt(r);
  const double z = std::sqrt(2.0 * kappa * r);
  if (r <= st.r_switch) {
    const auto [nv, nd] = n_bound_ray(st.l, st.lambda, z);
    return std::pow(r, double(st.l + 1)) * std::exp(expo) * nv;
  }
  const HeunParams p = heun_family(st.l, Complex(st.lambda));
  const SeriesResult b = eval_Bplus(p, Complex(z), 200);
  return st.k1 * std::pow(r, double(st.l + 1)) * std::exp(expo) *
         b.value.real();
}

double outer_turning_point(double alpha, int l, double kappa) {
  auto fpot = [&](double r) {
    return kappa * kappa + double(l) * (l + 1) / (r * r) - alpha / std::sqrt(r);
  };
  // The classically allowed region (fpot < 0) is bounded; find its right edge.
  double inside = -1.0;
  for (int i = 0; i <= 400; ++i) {
    const double r = std::pow(10.0, -3.0 + 12.0 * i / 400.0);
    if (fpot(r) < 0.0) inside = r;
  }
  if (inside < 0.0) {
    throw NumericError("outer_turning_point: no classically allowed region");
  }
  return find_root_bracketed(fpot, inside, 1e12, 1e-10 * inside);
}

}  // namespace

BoundState make_bound_state(double alpha, int l, const SpectrumEntry& entry) {
  if (!(alpha > 0.0) || l < 0 || !(entry.kappa > 0.0)) {
    throw NumericError("make_bound_state: invalid parameters");
  }
  BoundState st;
  st.alpha = alpha;
  st.l = l;
  st.entry = entry;
  st.lambda = lambda_bound(alpha, entry.kappa);
  const BoundRayConnection conn = bound_ray_connection(l, st.lambda);
  st.k1 = conn.k1;

  // Switch radius: the root leaves a residual |K2| ~ slope * (kappa root
  // tolerance), and the discarded K2 H+ component grows like
  // e^{z^2 + 2 lambda z} z^{-lambda^2} relative to K1 B+. Switch to the pure
  // K1 B+ form at the largest z where that contamination is still <= 1e-9,
  // which is also far enough out for the asymptotic truncation.
  const double ln_ratio =
      conn.ln_abs_k2 - std::log(std::max(std::abs(conn.k1), kTinyFloor));
  auto contam_ln = [&](double z) {
    return ln_ratio + z * z + 2.0 * st.lambda * z -
           st.lambda * st.lambda * std::log(z);
  };
  double z_switch = 3.0;
  for (double z = 12.0; z >= 3.0; z -= 0.05) {
    if (contam_ln(z) <= std::log(1e-9)) {
      z_switch = z;
      break;
    }
  }
  st.r_switch = z_switch * z_switch / (2.0 * entry.kappa);

  // Representation-glue diagnostic: both forms evaluated at the same point.
  {
    const double r_probe = st.r_switch * 0.999999;
    BoundState probe = st;
    probe.norm = 1.0;
    const double series_val = bound_u_raw(probe, r_probe);
    probe.r_switch = 0.5 * r_probe;  // forces the asymptotic branch
    const double asym_val = bound_u_raw(probe, r_probe);
    st.glue_mismatch = std::abs(series_val - asym_val) /
                       std::max(std::abs(series_val), kTinyFloor);
    if (st.glue_mismatch > 1e-5) {
      throw NumericError(
          "make_bound_state: series and asymptotic forms disagree at the "
          "switch radius (spurious root?)");
    }
  }

  // Normalization: int_0^infty u^2 dr = 1.
  double peak = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double r =
        std::pow(10.0, -2.0 + (std::log10(4.0 * st.r_switch) + 2.0) * i / 40.0);
    peak = std::max(peak, std::abs(bound_u_raw(st, r)));
  }
  double r_end = 2.0 * st.r_switch;
  while (std::abs(bound_u_raw(st, r_end)) > 1e-13 * peak && r_end < 1e9) {
    r_end *= 1.5;
  }
  auto integrand = [&](double r) {
    const double u = bound_u_raw(st, r);
    return Complex(u * u, 0.0);
  };
  const double tol_abs = 1e-10 * peak * peak * r_end;
  const auto [i1, e1] =
      adaptive_quadrature(integrand, 1e-8, st.r_switch, 0.5 * tol_abs);
  const auto [i2, e2] =
      adaptive_quadrature(integrand, st.r_switch, r_end, 0.5 * tol_abs);
  const double total = i1.real() + i2.real();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericError("make_bound_state: normalization integral failed");
  }
  st.norm = std::sqrt(total);
  return st;
}

double bound_wavefunction(const BoundState& state, double r) {
  if (!(r > 0.0)) throw NumericError("bound_wavefunction: requires r > 0");
  return bound_u_raw(state, r) / state.norm;
}

int bound_node_count(const BoundState& state) {
  const double r_tp =
      outer_turning_point(state.alpha, state.l, state.entry.kappa);
  const int n_grid = 4000;
  int nodes = 0;
  double prev = 0.0;
  for (int i = 1; i <= n_grid; ++i) {
    const double r = 1e-6 + (r_tp - 1e-6) * double(i) / n_grid;
    const double u = bound_wavefunction(state, r);
    if (prev != 0.0 && u * prev < 0.0) ++nodes;
    if (u != 0.0) prev = u;
  }
  return nodes;
}

std::vector<PhaseShift> phase_shift(double alpha, int l,
                                    const std::vector<double>& k_grid) {
  if (k_grid.empty()) return {};
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    if (!(k_grid[i] > 0.0) || (i > 0 && !(k_grid[i] > k_grid[i - 1]))) {
      throw NumericError("phase_shift: k grid must be strictly increasing and positive");
    }
  }
  std::vector<double> raw(k_grid.size());
  parallel_for(int(k_grid.size()),
               [&](int i) { raw[i] = raw_delta(alpha, l, k_grid[i]); });

  // Unwrap mod pi, anchored at the largest k.
  std::vector<double> delta(k_grid.size());
  delta.back() = std::remainder(raw.back(), kPi);
  for (int i = int(k_grid.size()) - 2; i >= 0; --i) {
    delta[i] = delta[i + 1] + std::remainder(raw[i] - delta[i + 1], kPi);
    if (std::abs(delta[i] - delta[i + 1]) >= kPi / 2.0) {
      throw NumericError(
          "phase_shift: adjacent phases jump by >= pi/2 between k = " +
          std::to_string(k_grid[i]) + " and " + std::to_string(k_grid[i + 1]) +
          "; refine the k grid");
    }
  }

  std::vector<PhaseShift> out(k_grid.size());
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    out[i].l = l;
    out[i].k = k_grid[i];
    out[i].delta = delta[i];
    out[i].s_matrix = std::exp(Complex(0.0, 2.0 * delta[i]));
  }
  return out;
}

Complex s_matrix(double alpha, int l, double k) {
  if (!(k > 0.0)) throw NumericError("s_matrix: requires k > 0");
  if (alpha == 0.0) return Complex(1.0, 0.0);
  const double C = coulomb_like_constant(alpha, k);
  Complex s;
  if (kPi * C <= 12.0) {
    // Direct route: S = K2*/K2 times the reference-phase factor (2k)^{-2iC}.
    PhysicalConfig cfg{alpha, l, Complex(k, 0.0)};
    const ParamMap pm = map_params(cfg);
    const ConnectionPair conn =
        connection_by_matching(pm.params, -kPi / 4.0, 1e-9);
    if (std::abs(conn.k2) == 0.0) {
      throw NumericError("s_matrix: K2 vanishes (resonant point)");
    }
    s = std::conj(conn.k2) / conn.k2 *
        std::exp(Complex(0.0, -2.0 * C * std::log(2.0 * k)));
  } else {
    // K2 is below double-precision resolution relative to K1 (ratio
    // e^{-pi C}); use the dominant-coefficient route.
    s = std::exp(Complex(0.0, 2.0 * raw_delta(alpha, l, k)));
  }
  if (std::abs(std::abs(s) - 1.0) > 1e-10) {
    throw NumericError("s_matrix: unitarity check failed (|S| = " +
                       std::to_string(std::abs(s)) + ")");
  }
  return s;
}

ScatteringParts scattering_wave_parts(double alpha, int l, double k, double r) {
  if (!(k > 0.0) || !(r > 0.0)) {
    throw NumericError("scattering_wave_parts: requires k > 0 and r > 0");
  }
  PhysicalConfig cfg{alpha, l, Complex(k, 0.0)};
  const ParamMap pm = map_params(cfg);
  const Complex z = pm.z_of_r(r);
  const SeriesResult B = eval_Bplus(pm.params, z, 200);
  const SeriesResult H = eval_Hplus(pm.params, z, 200);
  const ConnectionPair conn =
      connection_by_matching(pm.params, -kPi / 4.0, 1e-9);
  const double C = coulomb_like_constant(alpha, k);
  Complex k2 = conn.k2;
  if (kPi * C > 12.0 || alpha == 0.0) {
    // Reconstruct K2 from the reflection identity when direct extraction
    // has lost too much precision.
    k2 = std::abs(conn.k1) * std::exp(-kPi * C) *
         std::exp(Complex(0.0, -(l + 1) * kPi - std::arg(conn.k1)));
  }
  // u = (-2ikr)^{l+1} e^{i(kr + (alpha/k) sqrt r)} [K1 B+ + K2 H+], A_l = 1.
  const Complex pre =
      std::pow(Complex(0.0, -2.0 * k) * r, double(l + 1)) *
      std::exp(Complex(0.0, 1.0) * (k * r + (alpha / k) * std::sqrt(r)));
  ScatteringParts out;
  out.u_out = pre * conn.k1 * B.value;
  out.u_in = pre * k2 * H.value;
  return out;
}

Complex scattering_wavefunction(double alpha, int l, double k, double r) {
  return scattering_wave_parts(alpha, l, k, r).u();
}

std::pair<Complex, double> partial_wave_amplitude(double alpha, double k,
                                                  double theta, int l_max) {
  if (l_max < 0) throw NumericError("partial_wave_amplitude: l_max must be >= 0");
  if (!(theta > 0.0) || theta > kPi) {
    throw NumericError("partial_wave_amplitude: requires 0 < theta <= pi");
  }
  const double x = std::cos(theta);
  std::vector<double> legendre(l_max + 1);
  legendre[0] = 1.0;
  if (l_max >= 1) legendre[1] = x;
  for (int l = 1; l + 1 <= l_max; ++l) {
    legendre[l + 1] =
        ((2.0 * l + 1.0) * x * legendre[l] - double(l) * legendre[l - 1]) /
        (l + 1.0);
  }
  Complex f = 0.0;
  double last_term = 0.0;
  for (int l = 0; l <= l_max; ++l) {
    const double dl = phase_shift(alpha, l, {k}).front().delta;
    const Complex term = (2.0 * l + 1.0) * std::exp(Complex(0.0, dl)) *
                         std::sin(dl) * legendre[l] / k;
    f += term;
    last_term = std::abs(term);
  }
  return {f, last_term};
}

}  // namespace sqrtpot
