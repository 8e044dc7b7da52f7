#pragma once

#include <cstdint>
#include <vector>

#include "dicke/clicktrace.hpp"
#include "dicke/params.hpp"

namespace dicke::analysis {

// ---------------------------------------------------------------------------
// Click-stream analysis chain: binning, transition detection, time-axis
// conversion, subtrace splitting, correlation estimation, run averaging.
// ---------------------------------------------------------------------------

struct BinnedCounts {
  double bin_width = 0.0;   // s
  double start_time = 0.0;  // s, left edge of counts[0]
  std::vector<std::uint64_t> counts;

  double rate(std::size_t k) const {
    return static_cast<double>(counts[k]) / bin_width;
  }
};

// Histogram of the trace on a uniform grid; the last bin is padded to cover
// the full duration, so the sum of counts equals the total click number.
BinnedCounts bin_counts(const synth::ClickTrace& trace, double bin_width);

struct TransitionOptions {
  double bin_width = 100e-6;
  double threshold_rate = 1.8e7;  // clicks/s (18 per microsecond)
  // The detected rise lags the crossing of the critical point by roughly the
  // amplification risetime, so the reported t_cr sits this far before the
  // first super-threshold bin.
  double risetime = 1e-3;
};

// First time the binned rate exceeds the threshold, minus the risetime
// margin.  Throws DataError("no transition found") when no bin qualifies.
double detect_transition(const synth::ClickTrace& trace,
                         const TransitionOptions& options = {});

// Linear map from recording time to relative coupling x = (lambda/lambda_cr)^2
// anchored at x(t_start) = x_start and x(t_cr) = 1.  The optional atom-loss
// correction multiplies x by N(t)/N(t_cr) with N decaying linearly by
// loss_fraction over [t_start, t_loss_end]; the critical power scales as 1/N,
// so losing atoms raises the threshold and lowers the effective coupling.
struct CouplingAxis {
  double t_cr = 0.0;
  double t_start = 0.0;
  double x_start = 0.55;
  bool atom_loss = false;
  double loss_fraction = 0.10;
  double t_loss_end = 0.0;  // defaults to t_cr when <= t_start

  double x_at(double t) const;
};

double time_to_coupling(double t, const CouplingAxis& axis);

struct PhotonNumber {
  double nbar = 0.0;
  // Rates below background clamp to zero instead of going negative; the flag
  // records that the clamp fired.
  bool clamped = false;
};

// Mean intracavity photon number from a detected count rate,
// nbar = (r - r_b) / (2 kappa eta).
PhotonNumber photon_number_from_rate(double rate, const PhysicalParams& p);

// ---------------------------------------------------------------------------
// Subtraces.  The pre-transition record is cut into quasi-static pieces whose
// length shrinks geometrically toward the critical point, down to a floor
// where the sweep is effectively stationary over one piece.
// ---------------------------------------------------------------------------

struct SubtraceOptions {
  double max_length = 50e-3;
  double min_length = 4e-3;
  // Length ratio between a subtrace and the one before it (moving toward the
  // critical point); must be in (0, 1].
  double ratio = 0.75;
};

struct Subtrace {
  synth::ClickTrace clicks;  // timestamps re-based to the subtrace start
  double t_begin = 0.0;  // within the parent trace
  double t_end = 0.0;
  double x_center = 0.0;  // coupling at the subtrace midpoint
};

// Partition of [t_start, t_cr]: lengths decrease monotonically toward t_cr,
// the last piece ends exactly at t_cr and has min_length, and the earliest
// piece absorbs the leftover so there are no gaps or overlaps.  A record
// shorter than min_length comes back as a single subtrace.
std::vector<Subtrace> split_subtraces(const synth::ClickTrace& trace,
                                      const CouplingAxis& axis,
                                      const SubtraceOptions& options = {});

// ---------------------------------------------------------------------------
// Correlation estimation.
// ---------------------------------------------------------------------------

struct G2Estimate {
  double tau_bin = 2e-6;
  std::vector<double> tau;    // bin centers, tau[k] = k * tau_bin
  std::vector<double> value;  // g2 estimate per lag bin
  std::vector<double> error;  // standard error per lag bin
  double x_center = 0.0;
  int runs = 0;  // contributing estimates after averaging
};

struct G2Options {
  double tau_bin = 2e-6;
  double max_lag = 4e-4;
};

// Binned product estimator: counts n_i on the tau_bin grid, then
// g2(k) = <n_i n_{i+k}> / <n>^2 for k >= 1 and <n_i (n_i - 1)> / <n>^2 at
// k = 0.  Standard errors come from the empirical variance of the products,
// floored at the one-pair level so empty lags keep a finite weight.  Throws
// DataError on fewer than two clicks.
G2Estimate g2_estimator(const Subtrace& subtrace, const G2Options& options = {});

// Inverse-variance average of estimates on a common tau grid; x_center and
// runs aggregate accordingly.  Throws DataError on mismatched grids or an
// empty group.
G2Estimate average_runs(const std::vector<G2Estimate>& estimates);

// Groups estimates into coupling bins of the given width and averages each
// group; bins are centered on multiples of the width.  Returned sorted by x.
std::vector<G2Estimate> average_by_coupling(
    const std::vector<G2Estimate>& estimates, double x_bin_width);

// Angular frequency of the correlation beat from the spacing of the first
// two local minima of value(tau): omega = pi / spacing.  Minima are refined
// by parabolic interpolation.  Throws DataError when fewer than two minima
// exist.
double beat_frequency(const std::vector<double>& tau,
                      const std::vector<double>& value);

// ---------------------------------------------------------------------------
// Rate curve against coupling.
// ---------------------------------------------------------------------------

struct NbarCurve {
  std::vector<double> x;
  std::vector<double> rate;      // clicks/s pooled per coupling bin
  std::vector<double> nbar;      // photon number from the rate
  std::vector<double> nbar_err;  // counting error propagated through the map
};

// Pools 100 us count bins into coupling bins of width x_bin_width over the
// pre-transition record and converts rates to photon numbers.
NbarCurve nbar_vs_coupling(const BinnedCounts& bins, const CouplingAxis& axis,
                           const PhysicalParams& p, double x_bin_width = 0.005);

}  // namespace dicke::analysis
