#pragma once

#include <complex>
#include <vector>

namespace dicke::fft {

// In-place complex DFT of x (length n arbitrary), sign = -1 forward
// (engineering convention e^{-i 2 pi k j / n}), sign = +1 inverse without
// the 1/n normalisation.  Plans are cached per (n, sign) behind a mutex.
void transform(std::vector<std::complex<double>>& x, int sign);

inline void forward(std::vector<std::complex<double>>& x) { transform(x, -1); }
inline void inverse(std::vector<std::complex<double>>& x) { transform(x, +1); }

}  // namespace dicke::fft
