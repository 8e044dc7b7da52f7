#pragma once

#include <complex>

#include "dicke/params.hpp"

namespace dicke::meanfield {

enum class Branch { normal, plus, minus };

// Semiclassical fixed point of the driven-damped model at coupling lambda
// with symmetry-breaking field zeta.  beta is real in steady state; w is the
// lower-energy spin branch, so w^2 + beta^2 = N^2/4 holds by construction.
struct SteadyState {
  std::complex<double> alpha;  // cavity amplitude, sqrt(photons)
  double beta = 0.0;           // <J_->
  double w = 0.0;              // <J_z>
  Branch branch = Branch::normal;
  double residual = 0.0;       // |beta - rhs(beta)| after convergence
};

SteadyState steady_state(const PhysicalParams& p, double lambda, double zeta);

// zeta = 0 bifurcation branch in closed form: 0 below threshold,
// (N/2)sqrt(1 - 1/x^2) above, x = (lambda/lambda_cr)^2.
double steady_state_closed_form(const PhysicalParams& p, double lambda);

// Coefficients of the quadratic fluctuation Hamiltonian after displacing
// the spin mode: omega0_t*db'db - mu*(db+db')^2 + lambda_t*(da+da')(db+db').
struct RenormalizedParams {
  double omega0_t = 0.0;  // rad/s
  double lambda_t = 0.0;  // rad/s
  double mu = 0.0;        // rad/s
};

RenormalizedParams hp_renormalize(const PhysicalParams& p,
                                  const SteadyState& s, double lambda);

// Per-run effective field: the offset enters as zeta*cos(phi).
inline double ensemble_zeta(double zeta, double phi) {
  return zeta * std::cos(phi);
}

}  // namespace dicke::meanfield
