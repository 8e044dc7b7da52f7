#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dicke/params.hpp"

namespace dicke::synth {

// Linear pump-power ramp expressed on the relative-coupling axis.  x(t)
// interpolates x_start..x_end over `duration`; the trace is generated as
// quasi-static blocks of `block_length` with x frozen per block.
struct SweepSchedule {
  double x_start = 0.55;
  double x_end = 1.05;
  double duration = 0.8;       // s
  double block_length = 4e-3;  // s, must be >= 1 ms
  double zeta = 60.0;          // symmetry-breaking field, spin units
  double phi = 0.0;            // per-run phase; zeta*cos(phi) acts on the mean
  // Momentum-mode damping profile: rises with coupling, peaks at x_peak with
  // a cusp, and vanishes at threshold, gamma(x) =
  //   gamma_peak * ((1-x)/(1-x_peak))^shape * exp(shape*(x-x_peak)/(1-x_peak))
  // floored at gamma_floor so near-threshold blocks keep a finite linewidth.
  double gamma_peak = 2.0 * 3.14159265358979323846 * 270.0;  // rad/s
  double gamma_x_peak = 0.95;
  double gamma_shape = 0.25;
  double gamma_floor = 2.0 * 3.14159265358979323846 * 40.0;  // rad/s
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument

  double gamma_profile(double x) const;  // rad/s, 0 only above threshold
  // Coupling frozen for the block starting at t (block index floor(t/block)).
  double x_at_block_start(double t) const;
  double time_of_x(double x) const;  // inverse of the linear ramp
};

// Detection record: photon arrival times relative to the trace start.
// Timestamps are nanoseconds, strictly increasing, unique; 1 ns collisions
// are resolved by shifting the later click forward.
struct ClickTrace {
  std::vector<std::uint64_t> timestamps_ns;
  double duration = 0.0;  // s
  std::optional<SweepSchedule> schedule;  // present for sweep traces
  PhysicalParams true_params;             // generator inputs, for recovery tests

  std::size_t count() const { return timestamps_ns.size(); }
  double mean_rate() const;  // counts/s over the full duration

  void validate() const;  // throws DataError on ordering/range violations
};

// Enforces strictly increasing unique ns stamps by pushing collisions +1 ns.
void deduplicate_timestamps(std::vector<std::uint64_t>& ts);

// CSV form: `# duration_ns=...` header line, one decimal u64 per line.
std::string to_csv(const ClickTrace& trace);
ClickTrace from_csv(const std::string& text);

// Binary form: magic "CLK1", little-endian u64 count, then the timestamps
// as little-endian u64.  The format stores no duration; loading infers it
// from the last click, so prefer CSV when the exact duration matters.
std::vector<std::uint8_t> to_binary(const ClickTrace& trace);
ClickTrace from_binary(const std::uint8_t* data, std::size_t size);

// File round-trip; the format is picked by extension (".csv" text, else
// binary) on write and by sniffing the magic on read.
void save_clicktrace(const ClickTrace& trace, const std::string& path);
ClickTrace load_clicktrace(const std::string& path);

}  // namespace dicke::synth
