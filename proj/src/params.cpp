#include "dicke/params.hpp"

#include <cmath>
#include <stdexcept>

#include "dicke/constants.hpp"

namespace dicke {

void PhysicalParams::validate() const {
  if (!(n_atoms >= 1.0)) throw std::invalid_argument("params: N must be >= 1");
  if (!(omega > 0.0)) throw std::invalid_argument("params: omega must be > 0");
  if (!(omega0 > 0.0)) throw std::invalid_argument("params: omega0 must be > 0");
  if (!(kappa > 0.0)) throw std::invalid_argument("params: kappa must be > 0");
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("params: eta must be in (0, 1]");
  if (!(r_b >= 0.0)) throw std::invalid_argument("params: r_b must be >= 0");
  if (!(temperature >= 0.0))
    throw std::invalid_argument("params: T must be >= 0");
}

PhysicalParams default_params() {
  PhysicalParams p;
  p.n_atoms = 1.6e5;
  p.omega = two_pi * 1.0e7;
  p.omega0 = two_pi * 8.3e3;
  p.kappa = two_pi * 1.25e6;
  p.eta = 0.05;
  p.r_b = 341.0;
  p.temperature = 100e-9;
  p.coupling_convention = CouplingConvention::lambda;
  return p;
}

PhysicalParams params_from_config(const config::Config& cfg) {
  PhysicalParams d = default_params();
  PhysicalParams p;
  p.n_atoms = cfg.get_double("N", d.n_atoms);
  p.omega = two_pi * cfg.get_double("omega_hz", d.omega / two_pi);
  p.omega0 = two_pi * cfg.get_double("omega0_hz", d.omega0 / two_pi);
  p.kappa = two_pi * cfg.get_double("kappa_hz", d.kappa / two_pi);
  p.eta = cfg.get_double("eta", d.eta);
  p.r_b = cfg.get_double("r_b", d.r_b);
  p.temperature = 1e-9 * cfg.get_double("T_nK", d.temperature * 1e9);
  p.coupling_convention = coupling_convention_from_string(
      cfg.get_string("coupling_convention", "lambda"));
  p.validate();
  return p;
}

double lambda_cr_closed(const PhysicalParams& p) {
  return 0.5 * std::sqrt(p.omega * p.omega0);
}

double lambda_cr_open(const PhysicalParams& p) {
  return std::sqrt((p.kappa * p.kappa + p.omega * p.omega) * p.omega0 /
                   (4.0 * p.omega));
}

double lambda_from_x(const PhysicalParams& p, double x) {
  if (x < 0.0) throw std::domain_error("lambda_from_x: x must be >= 0");
  return lambda_cr_open(p) * std::sqrt(x);
}

double soft_mode_frequency(const PhysicalParams& p, double x) {
  if (x < 0.0 || x > 1.0)
    throw std::domain_error("soft_mode_frequency: x must be in [0, 1]");
  return p.omega0 * std::sqrt(1.0 - x);
}

double kappa_eff(const PhysicalParams& p, double lambda) {
  if (lambda < 0.0) throw std::domain_error("kappa_eff: lambda must be >= 0");
  const double l =
      p.coupling_convention == CouplingConvention::two_lambda ? 2.0 * lambda
                                                              : lambda;
  return l * l * p.kappa / (p.omega * p.omega + p.kappa * p.kappa);
}

double thermal_occupation(double nu, double temperature) {
  if (!(nu > 0.0))
    throw std::domain_error("thermal_occupation: nu must be > 0");
  if (temperature < 0.0)
    throw std::domain_error("thermal_occupation: T must be >= 0");
  if (temperature == 0.0) return 0.0;
  const double ratio = hbar * nu / (k_B * temperature);
  // expm1 keeps precision in the high-temperature limit ratio -> 0.
  return 1.0 / std::expm1(ratio);
}

CouplingConvention coupling_convention_from_string(const std::string& s) {
  if (s == "lambda") return CouplingConvention::lambda;
  if (s == "two_lambda") return CouplingConvention::two_lambda;
  throw config::ConfigError("coupling_convention must be 'lambda' or 'two_lambda', got '" + s + "'");
}

std::string to_string(CouplingConvention c) {
  return c == CouplingConvention::lambda ? "lambda" : "two_lambda";
}

}  // namespace dicke
