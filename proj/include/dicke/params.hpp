#pragma once

#include <string>

#include "dicke/config.hpp"

namespace dicke {

// How the pump-cavity coupling enters the depletion rate kappa_eff: `lambda`
// uses the Hamiltonian lambda directly, `two_lambda` uses 2*lambda (both
// parametrizations circulate; they differ by a factor 4 in kappa_eff only).
enum class CouplingConvention { lambda, two_lambda };

// Experimental constants of the cavity-BEC setup plus the unit conventions.
// All angular frequencies in rad/s; config files take Hz and are scaled at
// the boundary.
struct PhysicalParams {
  double n_atoms = 1.6e5;      // N
  double omega = 0.0;          // cavity-pump detuning, rad/s
  double omega0 = 0.0;         // atomic (recoil) splitting, rad/s
  double kappa = 0.0;          // cavity field amplitude decay, rad/s
  double eta = 0.05;           // detection efficiency
  double r_b = 341.0;          // background count rate, 1/s
  double temperature = 100e-9; // bath temperature, K
  CouplingConvention coupling_convention = CouplingConvention::lambda;

  void validate() const;  // throws std::invalid_argument on bad values
};

// Default parameter set: 1.6e5 atoms, omega = 2pi*10 MHz, omega0 = 2pi*8.3 kHz,
// kappa = 2pi*1.25 MHz, eta = 5%, r_b = 341/s, T = 100 nK.
PhysicalParams default_params();

PhysicalParams params_from_config(const config::Config& cfg);

// Threshold coupling of the lossless model, sqrt(omega*omega0)/2.
double lambda_cr_closed(const PhysicalParams& p);

// Threshold coupling with cavity decay, sqrt((kappa^2+omega^2)*omega0/(4*omega)).
double lambda_cr_open(const PhysicalParams& p);

// lambda corresponding to relative coupling x = (lambda/lambda_cr)^2, using
// the open-system threshold.
double lambda_from_x(const PhysicalParams& p, double x);

// Lowest polariton frequency omega0*sqrt(1-x); domain error for x outside [0,1].
double soft_mode_frequency(const PhysicalParams& p, double x);

// Ground-state depletion rate lambda_conv^2*kappa/(omega^2+kappa^2) where
// lambda_conv is lambda or 2*lambda per the convention.
double kappa_eff(const PhysicalParams& p, double lambda);

// Bose occupation 1/(exp(hbar*nu/kB*T)-1); T=0 gives 0; nu<=0 is a domain error.
double thermal_occupation(double nu, double temperature);

CouplingConvention coupling_convention_from_string(const std::string& s);
std::string to_string(CouplingConvention c);

}  // namespace dicke
