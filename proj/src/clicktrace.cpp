#include "dicke/clicktrace.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "dicke/errors.hpp"
#include "dicke/io.hpp"

namespace dicke::synth {

void SweepSchedule::validate() const {
  if (!(x_start >= 0.0) || !(x_end > x_start))
    throw std::invalid_argument("sweep schedule: need 0 <= x_start < x_end");
  if (!(duration > 0.0))
    throw std::invalid_argument("sweep schedule: duration must be positive");
  if (!(block_length >= 1e-3))
    throw std::invalid_argument("sweep schedule: block_length must be >= 1 ms");
  if (block_length > duration)
    throw std::invalid_argument("sweep schedule: block_length exceeds duration");
  if (!(zeta >= 0.0) || !std::isfinite(zeta))
    throw std::invalid_argument("sweep schedule: zeta must be finite and >= 0");
  if (!std::isfinite(phi))
    throw std::invalid_argument("sweep schedule: phi must be finite");
  if (!(gamma_peak >= 0.0) || !(gamma_floor >= 0.0))
    throw std::invalid_argument("sweep schedule: damping must be >= 0");
  if (!(gamma_x_peak > 0.0) || !(gamma_x_peak < 1.0) || !(gamma_shape > 0.0))
    throw std::invalid_argument("sweep schedule: bad damping profile shape");
}

double SweepSchedule::gamma_profile(double x) const {
  if (x >= 1.0) return 0.0;
  const double u = (1.0 - x) / (1.0 - gamma_x_peak);
  const double v = gamma_peak * std::pow(u, gamma_shape) *
                   std::exp(gamma_shape * (1.0 - u));
  return std::max(v, gamma_floor);
}

double SweepSchedule::x_at_block_start(double t) const {
  const double k = std::floor(t / block_length);
  const double tb = k * block_length;
  return x_start + (x_end - x_start) * (tb / duration);
}

double SweepSchedule::time_of_x(double x) const {
  return (x - x_start) / (x_end - x_start) * duration;
}

double ClickTrace::mean_rate() const {
  if (duration <= 0.0) return 0.0;
  return static_cast<double>(timestamps_ns.size()) / duration;
}

void ClickTrace::validate() const {
  const auto dur_ns = static_cast<std::uint64_t>(std::llround(duration * 1e9));
  std::uint64_t prev = 0;
  bool first = true;
  for (std::uint64_t t : timestamps_ns) {
    if (!first && t <= prev)
      throw DataError("click trace: timestamps not strictly increasing");
    if (t >= dur_ns && dur_ns > 0)
      throw DataError("click trace: timestamp beyond trace duration");
    prev = t;
    first = false;
  }
}

void deduplicate_timestamps(std::vector<std::uint64_t>& ts) {
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (ts[i] <= ts[i - 1]) ts[i] = ts[i - 1] + 1;
}

std::string to_csv(const ClickTrace& trace) {
  std::string out;
  out.reserve(trace.timestamps_ns.size() * 14 + 32);
  char buf[32];
  const auto dur_ns = static_cast<std::uint64_t>(std::llround(trace.duration * 1e9));
  std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(dur_ns));
  out += "# duration_ns=";
  out += buf;
  out += '\n';
  for (std::uint64_t t : trace.timestamps_ns) {
    std::snprintf(buf, sizeof buf, "%llu", static_cast<unsigned long long>(t));
    out += buf;
    out += '\n';
  }
  return out;
}

ClickTrace from_csv(const std::string& text) {
  ClickTrace trace;
  std::size_t pos = 0;
  bool have_duration = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto key = line.find("duration_ns=");
      if (key != std::string_view::npos) {
        std::uint64_t v = 0;
        const char* b = line.data() + key + 12;
        const auto [p, ec] = std::from_chars(b, line.data() + line.size(), v);
        if (ec != std::errc())
          throw DataError("click trace csv: bad duration_ns header");
        (void)p;
        trace.duration = static_cast<double>(v) * 1e-9;
        have_duration = true;
      }
      continue;
    }
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || p != line.data() + line.size())
      throw DataError("click trace csv: malformed timestamp line");
    trace.timestamps_ns.push_back(v);
  }
  if (!have_duration)
    throw DataError("click trace csv: missing `# duration_ns=` header");
  return trace;
}

namespace {

void put_u64le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> to_binary(const ClickTrace& trace) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + 8 * trace.timestamps_ns.size());
  out.insert(out.end(), {'C', 'L', 'K', '1'});
  put_u64le(out, trace.timestamps_ns.size());
  for (std::uint64_t t : trace.timestamps_ns) put_u64le(out, t);
  return out;
}

ClickTrace from_binary(const std::uint8_t* data, std::size_t size) {
  if (size < 12 || std::memcmp(data, "CLK1", 4) != 0)
    throw DataError("click trace binary: missing CLK1 magic");
  const std::uint64_t n = get_u64le(data + 4);
  if (size != 12 + 8 * n)
    throw DataError("click trace binary: truncated payload");
  ClickTrace trace;
  trace.timestamps_ns.resize(n);
  for (std::uint64_t i = 0; i < n; ++i)
    trace.timestamps_ns[i] = get_u64le(data + 12 + 8 * i);
  if (n > 0)
    trace.duration = static_cast<double>(trace.timestamps_ns.back() + 1) * 1e-9;
  return trace;
}

void save_clicktrace(const ClickTrace& trace, const std::string& path) {
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  if (csv) {
    io::atomic_write_file(path, to_csv(trace));
  } else {
    const auto blob = to_binary(trace);
    io::atomic_write_file(path, blob.data(), blob.size());
  }
}

ClickTrace load_clicktrace(const std::string& path) {
  const std::string text = io::read_file(path);
  if (text.size() >= 4 && std::memcmp(text.data(), "CLK1", 4) == 0)
    return from_binary(reinterpret_cast<const std::uint8_t*>(text.data()),
                       text.size());
  return from_csv(text);
}

}  // namespace dicke::synth
