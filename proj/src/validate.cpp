#include "sqrtpot/validate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "sqrtpot/heun.hpp"
#include "sqrtpot/oracle.hpp"
#include "sqrtpot/parallel.hpp"
#include "sqrtpot/spectra.hpp"

namespace sqrtpot {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

// --- criterion 1: free-particle reduction --------------------------------

CriterionResult free_particle(const Tolerances& tol) {
  CriterionResult res{1, "free-particle reduction (alpha = 0)"};
  double worst_u = 0.0, worst_d = 0.0;
  for (int l = 0; l <= 2; ++l) {
    PhysicalConfig cfg{0.0, l, Complex(1.0, 0.0)};
    const double r_ref = 3.0;
    const Complex c = regular_u(cfg, r_ref, 1e-12).u /
                      (r_ref * std::sph_bessel(unsigned(l), r_ref));
    // Scale deviations by the largest |c r j_l| on the grid so the nodes of
    // j_l do not blow up a pointwise relative measure.
    double scale = 0.0;
    std::vector<std::pair<double, Complex>> samples;
    for (int i = 1; i <= 40; ++i) {
      const double r = 0.25 * i;  // kr in (0, 10]
      const Complex ref = c * r * std::sph_bessel(unsigned(l), r);
      samples.push_back({r, ref});
      scale = std::max(scale, std::abs(ref));
    }
    for (const auto& [r, ref] : samples) {
      const Complex u =
          regular_u(cfg, r, 1e-12).u * (1.0 + tol.fixture_perturbation);
      worst_u = std::max(worst_u, std::abs(u - ref) / scale);
    }
    const auto ps = phase_shift(0.0, l, {1.0});
    worst_d = std::max(worst_d, std::abs(std::remainder(ps[0].delta, kPi)));
  }
  res.pass = worst_u <= tol.free_particle_rel &&
             worst_d <= tol.free_particle_delta;
  res.detail = "max |u - c r j_l| / max|u| = " + fmt(worst_u) +
               ", max |delta mod pi| = " + fmt(worst_d);
  return res;
}

// --- criterion 2: ODE residual of the regular series ---------------------

CriterionResult ode_residual(const Tolerances& tol) {
  CriterionResult res{2, "ODE residual of the regular solution"};
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int l = int(u01(rng) * 4.0);
    // |lambda| <= 0.7 keeps the series cancellation (~ e^{2|lambda||z|})
    // small enough that the finite-difference second derivative below can
    // resolve the residual at the 1e-8 level.
    const Complex lambda =
        0.7 * u01(rng) * std::exp(Complex(0.0, 2.0 * kPi * u01(rng)));
    const double radius = 0.3 + 4.5 * u01(rng);
    const double angle = 2.0 * kPi * u01(rng);
    const Complex z = radius * std::exp(Complex(0.0, angle));
    const HeunParams p = heun_family(l, lambda);

    // Fourth-order finite difference of the analytic series derivative.
    const double h = 2e-3;
    const SeriesResult s0 = eval_N(p, z, 1e-12);
    const Complex d1p = eval_N(p, z + h, 1e-12).derivative;
    const Complex d1m = eval_N(p, z - h, 1e-12).derivative;
    const Complex d2p = eval_N(p, z + 2.0 * h, 1e-12).derivative;
    const Complex d2m = eval_N(p, z - 2.0 * h, 1e-12).derivative;
    const Complex d2 = (-d2p + 8.0 * d1p - 8.0 * d1m + d2m) / (12.0 * h);

    const Complex c1 = 1.0 + p.alpha_h - p.beta_h * z - 2.0 * z * z;
    const Complex c0 = (p.gamma_h - p.alpha_h - 2.0) * z -
                       0.5 * (p.delta_h + p.beta_h * (1.0 + p.alpha_h));
    const Complex t2 = z * d2, t1 = c1 * s0.derivative, t0 = c0 * s0.value;
    const double denom =
        std::abs(t2) + std::abs(t1) + std::abs(t0) + kTinyFloor;
    const double r = std::abs(t2 + t1 + t0) / denom +
                     std::abs(tol.fixture_perturbation);
    worst = std::max(worst, r);
  }
  res.pass = worst <= tol.ode_residual;
  res.detail = "max normalized residual over 5 random family points = " +
               fmt(worst);
  return res;
}

// --- criterion 3: K2 matching vs integral representation -----------------

CriterionResult connection_consistency(const Tolerances& tol) {
  CriterionResult res{3, "K2: matching vs integral representation"};
  // Convergent point: l = 0, alpha = 1, kappa = 1 => lambda = -1/sqrt(2).
  const double lambda = -1.0 / std::sqrt(2.0);
  const HeunParams p = heun_family(0, Complex(lambda));
  const Complex k2_match = connection_by_matching(p, 0.0, 1e-9).k2;
  const Complex k2_int =
      K2_integral(p, 1e-8).first * (1.0 + tol.fixture_perturbation);
  const double rel = std::abs(k2_match - k2_int) /
                     std::max(std::abs(k2_match), kTinyFloor);

  // Divergent-region probe (large |lambda|): must be flagged, not compared.
  bool flagged = false;
  const double lambda_div = -1.0 / std::sqrt(2.0 * std::pow(0.25, 3));
  try {
    K2_integral(heun_family(0, Complex(lambda_div)), 1e-8);
  } catch (const NumericError&) {
    flagged = true;
  }
  res.pass = rel <= tol.connection_rel && flagged;
  res.detail = "relative gap at (l=0, kappa=1) = " + fmt(rel) +
               "; divergent probe " + (flagged ? "flagged" : "NOT flagged");
  return res;
}

// --- criteria 4 and 5: spectrum vs oracle, scaling law -------------------

// Frozen oracle eigenvalues for alpha = 1 (independent Numerov shooting,
// step-halved; stable to ~1e-9). Used for bracketing only; comparisons run
// against live oracle values.
constexpr double kKappaL0[3] = {0.661846842, 0.513033205, 0.444475421};
constexpr double kKappaL1[3] = {0.535360597, 0.458039460, 0.411601734};

CriterionResult spectrum_vs_oracle(const Tolerances& tol) {
  CriterionResult res{4, "bound spectrum vs shooting oracle"};
  const auto spec = bound_spectrum(1.0, 0, {0.42, 1.0}, 3);
  if (spec.size() != 3) {
    res.detail = "expected 3 levels in [0.42, 1], got " +
                 std::to_string(spec.size());
    return res;
  }
  double worst = 0.0;
  int bad_nodes = -1;
  for (int n = 0; n < 3; ++n) {
    const double guess = kKappaL0[n];
    const auto oracle =
        shoot_bound_state(1.0, 0, {0.99 * guess, 1.01 * guess});
    const double kappa =
        spec[n].kappa * (1.0 + tol.fixture_perturbation);
    worst = std::max(worst,
                     std::abs(kappa - oracle.value) / oracle.value);
    const BoundState st = make_bound_state(1.0, 0, spec[n]);
    if (bound_node_count(st) != n || oracle_node_count(1.0, 0, oracle.value) != n) {
      bad_nodes = n + 1;
    }
  }
  res.pass = worst <= tol.spectrum_rel && bad_nodes < 0;
  res.detail = "max |kappa_heun - kappa_oracle| / kappa = " + fmt(worst);
  if (bad_nodes > 0) {
    res.detail += "; node count wrong at level " + std::to_string(bad_nodes);
  }
  return res;
}

CriterionResult scaling_law(const Tolerances& tol) {
  CriterionResult res{5, "kappa_n(alpha) = alpha^{2/3} kappa_n(1) scaling"};
  double worst_heun = 0.0, worst_oracle = 0.0;
  for (int l = 0; l <= 1; ++l) {
    const double* ref = (l == 0) ? kKappaL0 : kKappaL1;
    const double lo = (l == 0) ? 0.42 : 0.39;
    // alpha = 1 baselines, computed live on both paths.
    const auto base = bound_spectrum(1.0, l, {lo, 1.0}, 3);
    if (base.size() != 3) {
      res.detail = "alpha=1 spectrum incomplete at l=" + std::to_string(l);
      return res;
    }
    double base_oracle[3];
    for (int n = 0; n < 3; ++n) {
      base_oracle[n] =
          shoot_bound_state(1.0, l, {0.99 * ref[n], 1.01 * ref[n]}).value;
    }
    for (double alpha : {0.5, 2.0}) {
      const double s = std::pow(alpha, 2.0 / 3.0);
      const auto spec = bound_spectrum(alpha, l, {lo * s, s}, 3);
      if (spec.size() != 3) {
        res.detail = "scaled spectrum incomplete at l=" + std::to_string(l) +
                     ", alpha=" + fmt(alpha);
        return res;
      }
      for (int n = 0; n < 3; ++n) {
        const double kh =
            spec[n].kappa * (1.0 + tol.fixture_perturbation);
        worst_heun = std::max(
            worst_heun, std::abs(kh / s - base[n].kappa) / base[n].kappa);
        const double target = s * ref[n];
        const double ko =
            shoot_bound_state(alpha, l, {0.99 * target, 1.01 * target}).value;
        worst_oracle = std::max(
            worst_oracle, std::abs(ko / s - base_oracle[n]) / base_oracle[n]);
      }
    }
  }
  res.pass = worst_heun <= tol.scaling_rel && worst_oracle <= tol.scaling_rel;
  res.detail = "max scaling defect: heun path " + fmt(worst_heun) +
               ", oracle path " + fmt(worst_oracle);
  return res;
}

// --- criterion 6: phase shifts vs oracle ---------------------------------

double oracle_match_radius(double k) {
  if (k < 0.3) return 4e5;
  if (k < 0.8) return 5e4;
  if (k < 1.5) return 1e4;
  return 3e3;
}

CriterionResult phases_vs_oracle(const Tolerances& tol) {
  CriterionResult res{6, "phase shifts vs asymptotic-matching oracle"};
  const std::vector<double> ks{0.2, 0.5, 1.0, 2.0};
  double worst = 0.0;
  std::string worst_at;
  std::vector<double> heun_delta(12), oracle_delta(12);
  parallel_for(12, [&](int idx) {
    const int l = idx / 4;
    const double k = ks[idx % 4];
    heun_delta[idx] = phase_shift(1.0, l, {k})[0].delta;
    oracle_delta[idx] =
        extract_phase_shift(1.0, l, k, oracle_match_radius(k)).value;
  });
  for (int idx = 0; idx < 12; ++idx) {
    const double dh =
        heun_delta[idx] + tol.fixture_perturbation;
    const double gap = std::abs(std::remainder(dh - oracle_delta[idx], kPi));
    if (gap > worst) {
      worst = gap;
      worst_at = "l=" + std::to_string(idx / 4) + ", k=" + fmt(ks[idx % 4]);
    }
  }
  res.pass = worst <= tol.phase_rad;
  res.detail = "max |delta_heun - delta_oracle| (mod pi) = " + fmt(worst) +
               " rad at " + worst_at;
  return res;
}

// --- criterion 7: unitarity ----------------------------------------------

CriterionResult unitarity(const Tolerances& tol) {
  CriterionResult res{7, "S-matrix unitarity |S_l| = 1"};
  double worst = 0.0;
  for (int l = 0; l <= 2; ++l) {
    for (double k : {0.2, 0.5, 1.0, 2.0}) {
      const Complex s =
          s_matrix(1.0, l, k) * (1.0 + tol.fixture_perturbation);
      worst = std::max(worst, std::abs(std::abs(s) - 1.0));
    }
  }
  res.pass = worst <= tol.unitarity;
  res.detail = "max ||S| - 1| over the criterion-6 grid = " + fmt(worst);
  return res;
}

// --- criterion 8: long-range boundary condition (negative control) -------

CriterionResult negative_control(const Tolerances& tol) {
  CriterionResult res{8, "long-range phase reference necessity"};
  const double k = 1.0, rm = 5000.0;
  const auto good = extract_phase_shift(1.0, 0, k, rm, PhaseForm::kTheta);
  const auto bad = extract_phase_shift(1.0, 0, k, rm, PhaseForm::kShortRange);
  auto drift = [](const OracleResult& r) {
    return std::abs(r.convergence_pairs[1].second -
                    r.convergence_pairs[0].second);
  };
  const double drift_good = drift(good) + std::abs(tol.fixture_perturbation);
  const double drift_bad = drift(bad);
  res.pass = drift_bad > 10.0 * tol.phase_rad && drift_good <= 1e-3;
  res.detail = "r_match doubling drift: short-range form " + fmt(drift_bad) +
               " rad, long-range form " + fmt(drift_good) + " rad";
  return res;
}

// --- criterion 9: Wronskian laws -----------------------------------------

CriterionResult wronskian_laws(const Tolerances& tol) {
  CriterionResult res{9, "Wronskian conservation (asymptotic pair and oracle)"};
  // W(B+, H+) z^{1+a} e^{-b z - z^2} must be z-independent along a ray.
  double worst_asym = 0.0;
  struct Probe {
    int l;
    Complex lambda;
    double angle;
  };
  const Probe probes[] = {
      {1, std::exp(Complex(0.0, -kPi / 4.0)) / std::sqrt(2.0), -kPi / 4.0},
      {0, Complex(-1.0 / std::sqrt(2.0)), 0.0},
  };
  for (const auto& pr : probes) {
    const HeunParams p = heun_family(pr.l, pr.lambda);
    Complex first{};
    double dev = 0.0;
    for (int i = 0; i <= 4; ++i) {
      const double radius = 8.0 + i;
      const Complex z = radius * std::exp(Complex(0.0, pr.angle));
      const SeriesResult b = eval_Bplus(p, z);
      const SeriesResult h = eval_Hplus(p, z);
      const Complex w = b.value * h.derivative - b.derivative * h.value;
      const Complex scaled = w * std::pow(z, 1.0 + p.alpha_h) *
                             std::exp(-p.beta_h * z - z * z);
      if (i == 0) {
        first = scaled;
      } else {
        dev = std::max(dev, std::abs(scaled - first) / std::abs(first));
      }
    }
    worst_asym = std::max(worst_asym, dev + std::abs(tol.fixture_perturbation));
  }

  // Oracle: the Wronskian of two independent Numerov solutions of the same
  // real equation must be grid-constant.
  IntegrationGrid grid;
  grid.r_start = 1.0;
  grid.r_end = 101.0;
  grid.step = 1e-3;
  const auto s1 = integrate_radial(1.0, 0, 1.0, grid, {0.0, 1e-3});
  const auto s2 = integrate_radial(1.0, 0, 1.0, grid, {1.0, 1.0});
  double w_ref = 0.0, worst_oracle = 0.0;
  for (std::size_t i = 500; i + 500 < s1.points.size(); i += 1000) {
    const double w = s1.points[i].u.real() * s2.points[i].du_dr.real() -
                     s1.points[i].du_dr.real() * s2.points[i].u.real();
    if (w_ref == 0.0) {
      w_ref = w;
    } else {
      worst_oracle = std::max(worst_oracle, std::abs(w - w_ref) /
                                                std::abs(w_ref));
    }
  }
  res.pass = worst_asym <= tol.wronskian_rel &&
             worst_oracle <= tol.oracle_wronskian_rel;
  res.detail = "asymptotic-pair drift " + fmt(worst_asym) +
               ", oracle drift " + fmt(worst_oracle);
  return res;
}

// --- criterion 10: asymptotic amplitude drift ----------------------------

CriterionResult amplitude_drift(const Tolerances& tol) {
  CriterionResult res{10, "scattering amplitude constancy at large r"};
  const double alpha = 1.0, k = 3.0;
  double amax = 0.0, amin = 1e300;
  for (int i = 0; i < 30; ++i) {
    const double r = 1e3 * std::pow(10.0, double(i) / 29.0);
    const ScatteringParts parts = scattering_wave_parts(alpha, 0, k, r);
    const double env = std::abs(parts.u_in) + std::abs(parts.u_out);
    amax = std::max(amax, env);
    amin = std::min(amin, env);
  }
  const double drift =
      amax / amin - 1.0 + std::abs(tol.fixture_perturbation);
  res.pass = drift <= tol.amplitude_drift;
  res.detail = "envelope drift over r in [1e3, 1e4]: " + fmt(drift);
  return res;
}

using CriterionFn = CriterionResult (*)(const Tolerances&);

struct Entry {
  int id;
  CriterionFn fn;
  bool fast;
};

constexpr Entry kCriteria[] = {
    {1, free_particle, true},     {2, ode_residual, true},
    {3, connection_consistency, true}, {4, spectrum_vs_oracle, false},
    {5, scaling_law, false},      {6, phases_vs_oracle, false},
    {7, unitarity, true},         {8, negative_control, false},
    {9, wronskian_laws, true},    {10, amplitude_drift, true},
};

}  // namespace

std::vector<CriterionResult> run_acceptance(Suite suite,
                                            const Tolerances& tol) {
  std::vector<CriterionResult> out;
  for (const Entry& e : kCriteria) {
    if (suite == Suite::kFast && !e.fast) continue;
    CriterionResult r;
    try {
      r = e.fn(tol);
    } catch (const std::exception& ex) {
      r.id = e.id;
      r.name = "criterion " + std::to_string(e.id);
      r.pass = false;
      r.detail = std::string("exception: ") + ex.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace sqrtpot
