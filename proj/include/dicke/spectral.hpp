#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "dicke/params.hpp"

namespace dicke::spectral {

using cplx = std::complex<double>;

// How the response denominator treats the polariton resonances.
//   exact            : full quartic D(nu); required when gamma = 0, where the
//                      soft mode is damped only through the cavity admixture
//   soft_mode_approx : D ~ ((gamma - i nu)^2 + ws^2)(kappa^2 + omega^2);
//                      drops the poles near nu = +-omega, keeps numerators
enum class DenominatorMode { exact, soft_mode_approx };

// Linearized cavity-spin fluctuation model around a steady state.  All rates
// in rad/s.  alpha is the coherent cavity amplitude of the operating point;
// n_th the bath occupation at the soft-mode frequency; n_b the detector
// background expressed as an effective intracavity photon number.
struct EffectiveModel {
  double omega = 0.0;
  double omega0 = 0.0;
  double lambda = 0.0;
  double kappa = 0.0;
  double gamma = 0.0;
  double n_th = 0.0;
  cplx alpha = 0.0;
  double n_b = 0.0;
  DenominatorMode mode = DenominatorMode::soft_mode_approx;

  double x() const;          // (lambda / lambda_cr)^2, open-system threshold
  double soft_mode() const;  // omega0 * sqrt(1 - x); throws for x > 1
};

// Builds the model at relative coupling x.  The operating-point amplitude
// comes from the mean-field steady state with symmetry bias zeta_eff; gamma
// and n_b are detection-side knobs with no feedback on the operating point.
// gamma = 0 forces exact mode: the approximate denominator has undamped real
// roots at +-ws and every overlap integral would diverge.
EffectiveModel make_model(const PhysicalParams& p, double x, double gamma,
                          double zeta_eff = 0.0, double n_b = 0.0,
                          DenominatorMode mode = DenominatorMode::soft_mode_approx);

// Throws SingularityError outside the stable normal phase, i.e. when
// 4 lambda^2 omega omega0 >= (gamma^2 + omega0^2)(kappa^2 + omega^2) or when
// the approximate denominator would put an undamped pole on the real axis.
void validate_stability(const EffectiveModel& m);

// Entries of the first row of the inverse response matrix at frequency nu:
//   da(nu) = sqrt(2k)(m11 a_in(nu) + m12 a_in'(-nu))
//          + sqrt(2g)(m13 b_in(nu) + m14 b_in'(-nu))
struct MatrixElements {
  cplx m11, m12, m13, m14;
  cplx det;  // denominator D(nu); quartic in exact mode
};

MatrixElements matrix_elements(const EffectiveModel& m, double nu);

// Full 4x4 response matrix M(nu) acting on (da(nu), da'(-nu), db(nu),
// db'(-nu)); always the exact system, independent of the denominator mode.
void matrix_M(const EffectiveModel& m, double nu, cplx out[4][4]);

// Stationary two-time building blocks at delay tau:
//   A(tau)  = Int_{-W}^{W} |m12|^2 e^{i nu tau} dnu      (cavity channel)
//   B(tau)  = Int_{-W}^{0} |m14|^2 e^{i nu tau} dnu      (spin channel)
//   C(tau)  = Int_{-W}^{W} m12(nu) m11(-nu) e^{i nu tau} dnu
//   Dv(tau) = Int_{-W}^{W} m14(nu) m13(-nu) e^{i nu tau} dnu
// W = correlation_window(m).  A is real and even in tau.
struct OverlapIntegrals {
  double A = 0.0;
  cplx B = 0.0;
  cplx C = 0.0;
  cplx Dv = 0.0;
};

OverlapIntegrals overlap_integrals(const EffectiveModel& m, double tau);

// Half width of the frequency window the overlaps run over:
// max(20 omega0, ws + 40 max(gamma, resonance half-width from |D|)).
double correlation_window(const EffectiveModel& m);

// First-order coherence G1(tau) = <a'(t+tau) a(t)> in intracavity photon
// units; G1(0) is the total photon number including the coherent part.
cplx g1(const EffectiveModel& m, double tau);

// Normalized intensity correlation of the detected stream, background n_b
// folded in; 1 for coherent light, >= 2 at tau = 0 for Gaussian light.
double g2(const EffectiveModel& m, double tau);

// <da' da> of the stationary state: G1(0) minus the coherent part.
double incoherent_photon_number(const EffectiveModel& m);

// Variance of the spin quadrature (db + db'), from the numeric inverse of
// M(nu), rows 3 and 4; equals 1 for the uncoupled vacuum.
double b_quadrature_variance(const EffectiveModel& m);

// Atomic density fluctuation proxy 4 omega / (omega0 x) <da' da>.
double density_fluctuation_variance(const EffectiveModel& m);

// One-sided emission spectra for the stream synthesizer, defined so that
//   Int S_n(nu) dnu / 2pi = <da' da>         (occupation_spectrum, >= 0)
//   Int P(nu) e^{i nu tau} dnu / 2pi = <da(t+tau) da(t)>   (pair_spectrum)
// The thermal pieces carry the same bath-peak simplification as g1/g2, so a
// stream synthesized from these spectra reproduces exactly the correlation
// functions this module predicts.
double occupation_spectrum(const EffectiveModel& m, double nu);
cplx pair_spectrum(const EffectiveModel& m, double nu);

// Overlap integrals for a whole set of delays, sharing one frequency grid.
// The grid is refined once on the spectral envelopes, with the segment width
// capped so the oscillation e^{i nu tau} stays resolved up to max |tau|;
// evaluating the kernels per (node, tau) then costs a few multiplies each.
struct FluctuationCurves {
  std::vector<double> tau;
  std::vector<double> A;
  std::vector<cplx> B;
  std::vector<cplx> C;
  std::vector<cplx> Dv;

  OverlapIntegrals at(std::size_t i) const;
};

FluctuationCurves overlap_curves(const EffectiveModel& m,
                                 const std::vector<double>& tau);

// g1/g2 assembled from precomputed overlaps; o0 must hold the tau = 0 values.
// Identical maths to the scalar g1()/g2(); reused by the fit pipeline.
cplx g1_from_overlaps(const EffectiveModel& m, const OverlapIntegrals& o);
double g2_from_overlaps(const EffectiveModel& m, const OverlapIntegrals& o,
                        const OverlapIntegrals& o0);

// Correlation functions on a uniform delay grid [0, tau_max].
struct CorrelationCurve {
  std::vector<double> tau;
  std::vector<cplx> g1;
  std::vector<double> g2;
  double photon_number = 0.0;     // G1(0)
  double coherent_fraction = 0.0; // |alpha|^2
  double x = 0.0;
};

CorrelationCurve correlation_curve(const EffectiveModel& m, double tau_max,
                                   std::size_t n_points);

}  // namespace dicke::spectral
