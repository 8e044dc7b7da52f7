#include "dicke/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace dicke::fft {

namespace {

// FFTW planning is not thread safe; execution with the new-array interface
// is.  Plans use FFTW_UNALIGNED so they stay valid for any vector buffer.
std::mutex plan_mutex;
std::map<std::pair<std::size_t, int>, fftw_plan> plan_cache;

fftw_plan plan_for(std::size_t n, int sign) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_pair(n, sign);
  auto it = plan_cache.find(key);
  if (it != plan_cache.end()) return it->second;
  std::vector<std::complex<double>> probe(n);
  fftw_plan p = fftw_plan_dft_1d(
      static_cast<int>(n), reinterpret_cast<fftw_complex*>(probe.data()),
      reinterpret_cast<fftw_complex*>(probe.data()),
      sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) throw std::runtime_error("fftw planning failed");
  plan_cache.emplace(key, p);
  return p;
}

}  // namespace

void transform(std::vector<std::complex<double>>& x, int sign) {
  if (x.empty()) return;
  fftw_plan p = plan_for(x.size(), sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(x.data()),
                   reinterpret_cast<fftw_complex*>(x.data()));
}

}  // namespace dicke::fft
