// Physical outputs: bound-state spectrum from the zeros of K2 on the bound
// ray, normalized bound eigenfunctions, S-matrix, phase shifts, scattering
// wavefunctions and the partial-wave amplitude.
#pragma once

#include <utility>
#include <vector>

#include "sqrtpot/radial.hpp"

namespace sqrtpot {

struct SpectrumEntry {
  int n = 0;                 ///< level index within fixed l (1 = deepest in range)
  double kappa = 0.0;        ///< binding wavenumber, E = -kappa^2
  double energy = 0.0;
  double residual = 0.0;     ///< |K2| at the converged root (may underflow to 0)
  double bracket_width = 0.0;
};

/// All zeros of kappa -> K2(4l+2, -2 alpha/sqrt(2 kappa^3), alpha^2/(2 kappa^3), 0)
/// inside [kappa_min, kappa_max], by sign-scan over a log grid (with density
/// adapted to the semiclassical level-count estimate) plus bracketed root
/// refinement. Sorted by decreasing kappa, indexed n = 1, 2, ...
std::vector<SpectrumEntry> bound_spectrum(double alpha, int l,
                                          std::pair<double, double> kappa_range,
                                          int max_levels);

/// Precomputed data for evaluating one normalized bound eigenfunction.
struct BoundState {
  double alpha = 0.0;
  int l = 0;
  SpectrumEntry entry;
  double lambda = 0.0;     ///< -alpha/sqrt(2 kappa^3)
  double k1 = 0.0;         ///< connection coefficient of the decaying branch
  double norm = 1.0;       ///< divides the raw piecewise form; int u^2 dr = 1
  double r_switch = 0.0;   ///< series/asymptotic representation switch radius
  double glue_mismatch = 0.0;  ///< relative gap of the two forms at r_switch
};

/// Builds the evaluator for a converged spectrum entry (normalizes by
/// quadrature). Throws if the normalization integral fails, which signals a
/// spurious root.
BoundState make_bound_state(double alpha, int l, const SpectrumEntry& entry);

/// Normalized u(r) (real on the bound ray).
double bound_wavefunction(const BoundState& state, double r);

/// Interior nodes of the bound eigenfunction, counted on a fine grid up to
/// the outer classical turning point.
int bound_node_count(const BoundState& state);

struct PhaseShift {
  int l = 0;
  double k = 0.0;
  double delta = 0.0;   ///< radians, continuously unwrapped across the grid
  Complex s_matrix{};   ///< e^{2 i delta}
};

/// Phase shifts delta_l(k) on a strictly increasing positive grid,
/// delta_l = -arg K2 - (alpha^2/(8k^3)) ln(2k)  (mod pi),
/// where the additive constant referred the phase to
/// Theta(r) = kr + (alpha/k) sqrt r - (alpha^2/(8k^3)) ln r. The phase is
/// computed from arg K1 through the reflection identity
/// arg K1 + arg K2 = -(l+1) pi (mod 2 pi), because K1 multiplies the
/// dominant asymptotic branch and stays well-conditioned at small k where
/// direct K2 extraction loses exp(pi alpha^2/(8k^3)) of precision.
/// Unwrapping is anchored at the largest k; throws if adjacent grid points
/// jump by >= pi/2 (refine the grid).
std::vector<PhaseShift> phase_shift(double alpha, int l,
                                    const std::vector<double>& k_grid);

/// S_l = K2*/K2 (times the (2k)^{-2iC} reference-phase factor, C =
/// alpha^2/(8k^3)); falls back to the K1 reflection identity when K2 is
/// below double-precision resolution. |S_l| = 1 is checked, not enforced.
Complex s_matrix(double alpha, int l, double k);

/// Ingoing and outgoing pieces of the scattering wavefunction
/// u = u_in + u_out = (-2ikr)^{l+1} e^{i(kr + (alpha/k) sqrt r)} [K1 B+ + K2 H+]
/// (normalization A_l = 1), evaluated from the optimally truncated
/// asymptotic sums. Valid in the asymptotic regime.
struct ScatteringParts {
  Complex u_in{}, u_out{};
  Complex u() const { return u_in + u_out; }
};
ScatteringParts scattering_wave_parts(double alpha, int l, double k, double r);

/// u_in + u_out, see scattering_wave_parts.
Complex scattering_wavefunction(double alpha, int l, double k, double r);

/// Partial-wave amplitude f(theta) = (1/k) sum_{l<=l_max} (2l+1) e^{i
/// delta_l} sin(delta_l) P_l(cos theta), plus the magnitude of the last
/// retained term as an explicit truncation report (no convergence claim).
std::pair<Complex, double> partial_wave_amplitude(double alpha, double k,
                                                  double theta, int l_max);

}  // namespace sqrtpot
