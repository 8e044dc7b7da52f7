#pragma once

#include "dicke/params.hpp"

namespace dicke::closedsys {

// Ground-state second moments of the two-mode quadratic Hamiltonian
// H = omega a'a + omega0 b'b + lambda (a+a')(b+b') with kappa = gamma = 0,
// in the normal phase.  x is relative to the closed-system threshold
// sqrt(omega*omega0)/2.
struct GroundStateFluctuations {
  double photon_variance = 0.0;      // <a'a>
  double quadrature_variance = 1.0;  // <(b+b')^2>
  double x = 0.0;
};

// Exact moments by normal-mode (symplectic) diagonalization; x in [0, 1).
GroundStateFluctuations ground_state_fluctuations(const PhysicalParams& p,
                                                  double x);

// Brute-force cross-check: dense ground state of the truncated Fock problem
// (n_a <= n_a_max, n_b <= n_b_max) via shifted inverse iteration.  Errors if
// the moments move by more than 1e-3 relative when both truncations double.
GroundStateFluctuations fock_oracle(const PhysicalParams& p, double x,
                                    int n_a_max = 10, int n_b_max = 60);

// Ground-state populations of odd-parity Fock states (sum over odd n_a+n_b),
// exposed for the parity selection rule check.
double fock_odd_parity_weight(const PhysicalParams& p, double x,
                              int n_a_max = 10, int n_b_max = 60);

}  // namespace dicke::closedsys
