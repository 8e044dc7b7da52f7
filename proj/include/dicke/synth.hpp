#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "dicke/clicktrace.hpp"
#include "dicke/params.hpp"
#include "dicke/spectral.hpp"

namespace dicke::synth {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Gaussian field surrogate.
//
// Draws a stationary complex Gaussian process delta a(t) whose covariance and
// pseudo-covariance match the normally ordered fluctuation spectra.  Such a
// process exists only while, for every frequency pair (nu, -nu), the 2x2
// covariance of the amplitudes is positive semidefinite, i.e. while
// |P(nu)| <= sqrt(S(nu) S(-nu)).  Squeezed-dominant spectra violate this and
// have no classical surrogate; by default that raises SingularityError.
// ---------------------------------------------------------------------------

struct FieldOptions {
  // Eigenvalue tolerance of the PSD check, relative to the 2x2 trace.
  double psd_tolerance = 1e-12;
  // Project each offending 2x2 covariance onto the nearest positive
  // semidefinite one instead of throwing; clipped_fraction reports how much
  // pair-spectrum weight was removed.
  bool truncate_to_classical = false;
};

struct FieldBlock {
  std::vector<cplx> samples;  // delta a(t_i), i = 0..n-1
  double dt = 0.0;
  double duration = 0.0;
  // Spectral weight removed by the classical projection, relative to the
  // total |P| weight; 0 when the covariance was realizable as given.
  double clipped_fraction = 0.0;
};

FieldBlock field_block(const spectral::EffectiveModel& m, double duration,
                       double dt, std::uint64_t seed,
                       const FieldOptions& options = {});

// Bernoulli thinning of the detection rate 2 kappa eta |alpha + da(t)|^2 + r_b
// on the field's sample grid.  Requires dt * max rate < 0.1; throws
// std::invalid_argument naming the largest admissible dt otherwise.
ClickTrace clicks_from_field(const FieldBlock& field, cplx alpha,
                             const PhysicalParams& p, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Designed product-rate synthesizer.
//
// The detected intensity of the displaced Gaussian field is super-bunched:
// its normalized correlation c(tau) = g2(tau) - 1 reaches c(0) > 2 near
// threshold, more than any single classical Gaussian intensity can carry
// (|xi|^2 saturates at c(0) = 1), and with a strong coherent offset c(tau)
// dips below zero at half the soft-mode period.  The stream generator
// therefore draws the rate as a product of two independent unit-mean
// displaced-Gaussian intensity factors,
//     rate(t) = R_sig * Y_a(t) * Y_b(t) + r_b,
//     Y_i(t)  = |sqrt(1 - w_i) + xi_i(t)|^2,
// with xi_i circular Gaussian fields built from nonnegative mode powers
// p_i(nu_k), w_i = sum_k p_i,k < 1, so E[Y_i] = 1 exactly.  Each factor's
// autocovariance  c_i(tau) = |C_i|^2 + 2 (1 - w_i) Re C_i,  with C_i(tau) =
// sum_k p_i,k e^{-i nu_k tau}, can go negative through the cross term; the
// product correlation c = c_a + c_b + c_a c_b spans both the super-bunched
// zero-lag excess (up to 3) and the anticorrelated dips.  The mode powers
// are fitted to the model's c(tau) by an unconstrained quasi-Newton pass in
// reparametrized variables.  Photon-number and rate means are exact by
// construction; the g2 shape carries the design residual (per-bin noise floor
// of the full 372-run ensemble sits above it).
// ---------------------------------------------------------------------------

struct RateDesign {
  std::vector<double> mode_power_a;  // length n_samples, FFT grid order
  std::vector<double> mode_power_b;
  std::size_t n_samples = 0;
  double dt = 0.0;                 // s, also the synthesis sample step
  double block_length = 0.0;       // s
  double nbar = 0.0;               // signal photons incl. coherent part
  double peak_residual = 0.0;      // max |designed g2 - target g2| in window
  double rms_residual = 0.0;       // rms of the same
  int iterations = 0;
};

struct DesignOptions {
  double cap = 0.995;        // upper bound on each factor weight w_i
  int max_iterations = 4000;
  int warm_iterations = 800; // budget when a warm start is supplied
  double tau_window = 14.0;  // fit window, units of 1 / omega_s
  const RateDesign* warm_start = nullptr;  // previous block of a sweep chain
  // a warm start whose peak correlation error stays above this after its
  // iteration budget is discarded in favour of a full cold optimisation
  double warm_fallback_peak = 0.12;
};

// Fits the two factor spectra to the g2 target of the model (coherent offset
// included via m.alpha).  Deterministic: fixed seeds, fixed iteration caps.
RateDesign design_rate_factors(const spectral::EffectiveModel& m,
                               double block_length, double dt,
                               const DesignOptions& options = {});

// Appends one block of clicks for sample times t0 + [0, block_length) to
// out_ns (nanoseconds, unsorted tail appended in time order).  rate_sig is
// the mean signal rate 2 kappa eta nbar; r_b adds background uniformly.
void synthesize_block(const RateDesign& d, double rate_sig, double r_b,
                      double t0, std::uint64_t seed,
                      std::vector<std::uint64_t>& out_ns);

// Stationary trace at fixed model parameters: one cached design reused for
// ceil(duration / block_length) independent blocks.  Used by the long
// moment-closure runs.
ClickTrace synthesize_stationary(const spectral::EffectiveModel& m,
                                 const PhysicalParams& p, double duration,
                                 double block_length, double dt,
                                 std::uint64_t seed);

// Full experimental run: linear coupling ramp in quasi-static blocks with
// the schedule's damping profile and coherent offset zeta*cos(phi); blocks
// at or above threshold emit at the saturated ordered-phase rate plus the
// mean-field coherent number.  Designs are cached process-wide keyed on the
// block operating point, so an ensemble of runs over one schedule designs
// each distinct block once; the cache depends on zeta only through |cos phi|.
ClickTrace synthesize_sweep(const SweepSchedule& s, const PhysicalParams& p);

// Clears the process-wide design cache (test isolation).
void clear_design_cache();

// Relative coupling ceiling for fluctuation blocks: beyond this the
// quasi-static linearized model stops being meaningful within a block, so
// the synthesizer (and the analysis fits) clamp x to it.
inline constexpr double x_fluctuation_ceiling = 0.9998;

// Detected photon scale of the ordered phase.  The two-mode quasi-static
// model understates the post-transition rise by orders of magnitude (the
// dispersive shift that drives it is out of scope), so above-threshold
// blocks emit at 2 kappa eta * (this + |alpha_mf|^2) + r_b, pinned to the
// observed detection-scale intracavity photon number.
inline constexpr double ordered_phase_photons = 49.0;

}  // namespace dicke::synth
