#include "dicke/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include "dicke/errors.hpp"

namespace dicke::analysis {

BinnedCounts bin_counts(const synth::ClickTrace& trace, double bin_width) {
  if (!(bin_width > 0.0))
    throw std::invalid_argument("bin_counts: bin width must be positive");
  BinnedCounts b;
  b.bin_width = bin_width;
  b.start_time = 0.0;
  const auto nbins = static_cast<std::size_t>(
      std::max<std::int64_t>(1, static_cast<std::int64_t>(
                                    std::ceil(trace.duration / bin_width))));
  b.counts.assign(nbins, 0);
  const double inv_ns = 1.0 / (bin_width * 1e9);
  for (const auto ts : trace.timestamps_ns) {
    auto k = static_cast<std::size_t>(static_cast<double>(ts) * inv_ns);
    if (k >= nbins) k = nbins - 1;  // rounding guard at the trace edge
    ++b.counts[k];
  }
  return b;
}

double detect_transition(const synth::ClickTrace& trace,
                         const TransitionOptions& options) {
  const BinnedCounts b = bin_counts(trace, options.bin_width);
  const double limit = options.threshold_rate * options.bin_width;
  for (std::size_t k = 0; k < b.counts.size(); ++k) {
    if (static_cast<double>(b.counts[k]) > limit)
      return b.start_time + static_cast<double>(k) * options.bin_width -
             options.risetime;
  }
  throw DataError("no transition found");
}

double CouplingAxis::x_at(double t) const {
  const double span = t_cr - t_start;
  double x = span > 0.0
                 ? x_start + (1.0 - x_start) * (t - t_start) / span
                 : 1.0;
  if (atom_loss) {
    const double t_end = t_loss_end > t_start ? t_loss_end : t_cr;
    auto n_of = [&](double u) {
      const double frac = std::clamp((u - t_start) / (t_end - t_start), 0.0, 1.0);
      return 1.0 - loss_fraction * frac;
    };
    x *= n_of(t) / n_of(t_cr);
  }
  return x;
}

double time_to_coupling(double t, const CouplingAxis& axis) {
  return axis.x_at(t);
}

PhotonNumber photon_number_from_rate(double rate, const PhysicalParams& p) {
  PhotonNumber n;
  const double signal = rate - p.r_b;
  if (signal < 0.0) {
    n.clamped = true;
    return n;
  }
  n.nbar = signal / (2.0 * p.kappa * p.eta);
  return n;
}

std::vector<Subtrace> split_subtraces(const synth::ClickTrace& trace,
                                      const CouplingAxis& axis,
                                      const SubtraceOptions& options) {
  if (!(options.min_length > 0.0) || options.max_length < options.min_length ||
      !(options.ratio > 0.0) || options.ratio > 1.0)
    throw std::invalid_argument("split_subtraces: bad length schedule");

  const double t0 = axis.t_start;
  const double t1 = std::min(axis.t_cr, trace.duration);
  std::vector<double> edges;  // built backwards from t_cr
  edges.push_back(t1);
  if (t1 - t0 <= options.min_length) {
    edges.push_back(t0);
  } else {
    double len = options.min_length;
    double edge = t1;
    while (true) {
      double next = edge - len;
      // the earliest piece absorbs the remainder, keeping the partition
      // monotone: its length only grows beyond the nominal schedule
      if (next - t0 < len / options.ratio) next = t0;
      edges.push_back(next);
      if (next <= t0) break;
      edge = next;
      len = std::min(len / options.ratio, options.max_length);
    }
  }
  std::reverse(edges.begin(), edges.end());

  std::vector<Subtrace> out;
  out.reserve(edges.size() - 1);
  const auto& ts = trace.timestamps_ns;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    Subtrace st;
    st.t_begin = edges[i];
    st.t_end = edges[i + 1];
    st.x_center = axis.x_at(0.5 * (st.t_begin + st.t_end));
    const auto lo_ns = static_cast<std::uint64_t>(
        std::llround(std::max(st.t_begin, 0.0) * 1e9));
    const auto hi_ns =
        static_cast<std::uint64_t>(std::llround(st.t_end * 1e9));
    const auto lo = std::lower_bound(ts.begin(), ts.end(), lo_ns);
    const auto hi = std::lower_bound(lo, ts.end(), hi_ns);
    st.clicks.duration = st.t_end - st.t_begin;
    st.clicks.timestamps_ns.reserve(static_cast<std::size_t>(hi - lo));
    for (auto it = lo; it != hi; ++it)
      st.clicks.timestamps_ns.push_back(*it - lo_ns);
    out.push_back(std::move(st));
  }
  return out;
}

G2Estimate g2_estimator(const Subtrace& subtrace, const G2Options& options) {
  const auto& ts = subtrace.clicks.timestamps_ns;
  if (ts.size() < 2)
    throw DataError("g2 estimator needs at least two clicks");
  if (!(options.tau_bin > 0.0) || !(options.max_lag > options.tau_bin))
    throw std::invalid_argument("g2_estimator: bad lag grid");

  const double bin_ns = options.tau_bin * 1e9;
  const auto nbins = static_cast<std::size_t>(
      std::ceil(subtrace.clicks.duration / options.tau_bin));
  auto nlags = static_cast<std::size_t>(
      std::floor(options.max_lag / options.tau_bin)) + 1;
  // keep at least a few independent index pairs per lag
  nlags = std::min(nlags, nbins / 2);
  if (nlags < 2) throw DataError("g2 estimator: subtrace shorter than lag grid");

  // occupied bins only; products between empty bins vanish
  std::vector<std::pair<std::uint64_t, double>> nz;
  for (std::size_t i = 0; i < ts.size();) {
    const auto bin = static_cast<std::uint64_t>(
        static_cast<double>(ts[i]) / bin_ns);
    std::size_t j = i;
    while (j < ts.size() &&
           static_cast<std::uint64_t>(static_cast<double>(ts[j]) / bin_ns) ==
               bin)
      ++j;
    nz.emplace_back(bin, static_cast<double>(j - i));
    i = j;
  }

  std::vector<double> prod(nlags, 0.0), prod2(nlags, 0.0);
  for (std::size_t i = 0; i < nz.size(); ++i) {
    // same-bin pairs: ordered count n(n-1)
    const double p0 = nz[i].second * (nz[i].second - 1.0);
    prod[0] += p0;
    prod2[0] += p0 * p0;
    for (std::size_t j = i + 1; j < nz.size(); ++j) {
      const std::uint64_t lag = nz[j].first - nz[i].first;
      if (lag >= nlags) break;
      const double pk = nz[i].second * nz[j].second;
      prod[lag] += pk;
      prod2[lag] += pk * pk;
    }
  }

  const double nbar =
      static_cast<double>(ts.size()) / static_cast<double>(nbins);
  G2Estimate est;
  est.tau_bin = options.tau_bin;
  est.x_center = subtrace.x_center;
  est.runs = 1;
  est.tau.resize(nlags);
  est.value.resize(nlags);
  est.error.resize(nlags);
  for (std::size_t k = 0; k < nlags; ++k) {
    const double npairs = static_cast<double>(nbins - k);
    const double mean = prod[k] / npairs;
    const double var = std::max(prod2[k] / npairs - mean * mean, 0.0);
    // floor at the one-pair level so empty lags keep a finite weight
    const double se = std::max(std::sqrt(var / npairs), 1.0 / npairs);
    est.tau[k] = static_cast<double>(k) * options.tau_bin;
    est.value[k] = mean / (nbar * nbar);
    est.error[k] = se / (nbar * nbar);
  }
  return est;
}

G2Estimate average_runs(const std::vector<G2Estimate>& estimates) {
  if (estimates.empty()) throw DataError("average_runs: empty group");
  const auto& first = estimates.front();
  const std::size_t n = first.value.size();
  for (const auto& e : estimates) {
    if (e.value.size() != n || e.tau_bin != first.tau_bin)
      throw DataError("average_runs: mismatched lag grids");
  }
  G2Estimate out;
  out.tau_bin = first.tau_bin;
  out.tau = first.tau;
  out.value.assign(n, 0.0);
  out.error.assign(n, 0.0);
  double xw_sum = 0.0, w_runs = 0.0;
  for (const auto& e : estimates) {
    xw_sum += e.x_center * e.runs;
    w_runs += e.runs;
    out.runs += e.runs;
  }
  out.x_center = w_runs > 0.0 ? xw_sum / w_runs : 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double wsum = 0.0, vsum = 0.0;
    for (const auto& e : estimates) {
      if (!(e.error[k] > 0.0)) continue;
      const double w = 1.0 / (e.error[k] * e.error[k]);
      wsum += w;
      vsum += w * e.value[k];
    }
    if (wsum > 0.0) {
      out.value[k] = vsum / wsum;
      out.error[k] = 1.0 / std::sqrt(wsum);
    }
  }
  return out;
}

std::vector<G2Estimate> average_by_coupling(
    const std::vector<G2Estimate>& estimates, double x_bin_width) {
  if (!(x_bin_width > 0.0))
    throw std::invalid_argument("average_by_coupling: bad bin width");
  std::map<std::int64_t, std::vector<G2Estimate>> groups;
  for (const auto& e : estimates) {
    const auto key =
        static_cast<std::int64_t>(std::llround(e.x_center / x_bin_width));
    groups[key].push_back(e);
  }
  std::vector<G2Estimate> out;
  out.reserve(groups.size());
  for (auto& [key, group] : groups) {
    G2Estimate avg = average_runs(group);
    avg.x_center = static_cast<double>(key) * x_bin_width;  // bin center
    out.push_back(std::move(avg));
  }
  return out;
}

double beat_frequency(const std::vector<double>& tau,
                      const std::vector<double>& value) {
  if (tau.size() != value.size() || tau.size() < 5)
    throw std::invalid_argument("beat_frequency: need matching curves");
  std::vector<double> minima;
  for (std::size_t k = 1; k + 1 < value.size() && minima.size() < 2; ++k) {
    if (value[k] <= value[k - 1] && value[k] < value[k + 1]) {
      // parabola through the three points around the discrete minimum
      const double denom = value[k - 1] - 2.0 * value[k] + value[k + 1];
      double shift = 0.0;
      if (denom > 0.0)
        shift = 0.5 * (value[k - 1] - value[k + 1]) / denom;
      shift = std::clamp(shift, -0.5, 0.5);
      minima.push_back(tau[k] + shift * (tau[k] - tau[k - 1]));
    }
  }
  if (minima.size() < 2)
    throw DataError("beat_frequency: fewer than two minima");
  return M_PI / (minima[1] - minima[0]);
}

NbarCurve nbar_vs_coupling(const BinnedCounts& bins, const CouplingAxis& axis,
                           const PhysicalParams& p, double x_bin_width) {
  if (!(x_bin_width > 0.0))
    throw std::invalid_argument("nbar_vs_coupling: bad bin width");
  struct Pool {
    double counts = 0.0;
    double seconds = 0.0;
  };
  std::map<std::int64_t, Pool> pools;
  for (std::size_t k = 0; k < bins.counts.size(); ++k) {
    const double t = bins.start_time + (static_cast<double>(k) + 0.5) * bins.bin_width;
    if (t >= axis.t_cr) break;  // pre-transition record only
    const double x = axis.x_at(t);
    const auto key = static_cast<std::int64_t>(std::llround(x / x_bin_width));
    auto& pool = pools[key];
    pool.counts += static_cast<double>(bins.counts[k]);
    pool.seconds += bins.bin_width;
  }
  NbarCurve curve;
  const double scale = 2.0 * p.kappa * p.eta;
  for (const auto& [key, pool] : pools) {
    if (!(pool.seconds > 0.0)) continue;
    const double rate = pool.counts / pool.seconds;
    curve.x.push_back(static_cast<double>(key) * x_bin_width);
    curve.rate.push_back(rate);
    curve.nbar.push_back(photon_number_from_rate(rate, p).nbar);
    // counting error on the pooled rate propagated through the linear map
    curve.nbar_err.push_back(std::sqrt(std::max(pool.counts, 1.0)) /
                             pool.seconds / scale);
  }
  return curve;
}

}  // namespace dicke::analysis
