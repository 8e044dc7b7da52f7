#pragma once

#include <stdexcept>

namespace dicke {

// A model evaluation hit a degenerate point: an undamped resonance on the
// integration path, a closed soft mode, a vanishing denominator.  Mapped to
// its own exit code by the command-line tool.
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (traces, tables, manifests).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dicke
