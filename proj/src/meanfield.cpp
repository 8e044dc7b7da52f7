#include "dicke/meanfield.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dicke/optim.hpp"

namespace dicke::meanfield {

namespace {

std::complex<double> alpha_from_beta(const PhysicalParams& p, double lambda,
                                     double beta, double zeta) {
  // alpha = 2*lambda*(beta+zeta) / ((i*kappa - omega) * sqrt(N))
  const std::complex<double> denom(-p.omega, p.kappa);
  return 2.0 * lambda * (beta + zeta) / (denom * std::sqrt(p.n_atoms));
}

}  // namespace

SteadyState steady_state(const PhysicalParams& p, double lambda, double zeta) {
  p.validate();
  if (lambda < 0.0)
    throw std::domain_error("steady_state: lambda must be >= 0");
  const double n = p.n_atoms;
  if (!(std::abs(zeta) < 0.5 * n))
    throw std::domain_error("steady_state: |zeta| must be < N/2");

  const double lcr = lambda_cr_open(p);
  const double x = (lambda / lcr) * (lambda / lcr);

  SteadyState s;
  if (x == 0.0 || (zeta == 0.0 && x <= 1.0)) {
    // normal phase fixed point
    s.beta = 0.0;
    s.w = -0.5 * n;
    s.alpha = alpha_from_beta(p, lambda, 0.0, zeta);
    s.branch = Branch::normal;
    s.residual = 0.0;
    return s;
  }

  // The connected branch carries the sign of zeta (or + for the spontaneous
  // zeta = 0 case above threshold); solve for u = sign * beta >= 0.
  const double sign = (zeta > 0.0 || (zeta == 0.0)) ? 1.0 : -1.0;
  const double zmag = std::abs(zeta);
  auto f = [&](double u) {
    const double root = std::sqrt(std::max(0.0, 1.0 - 4.0 * u * u / (n * n)));
    return u - x * (u + zmag) * root;
  };
  // For zeta > 0: f(0) < 0 < f(N/2).  For zeta = 0, x > 1: f < 0 just above
  // the trivial root u = 0, so bracket from a small positive offset.
  const double lo = (zmag > 0.0) ? 0.0 : 1e-9 * n;
  const double hi = 0.5 * n;
  const double u = optim::find_root(f, lo, hi, {.max_iter = 300});

  s.beta = sign * u;
  s.w = -std::sqrt(std::max(0.0, 0.25 * n * n - s.beta * s.beta));
  s.alpha = alpha_from_beta(p, lambda, s.beta, zeta);
  s.branch = sign > 0.0 ? Branch::plus : Branch::minus;
  s.residual = std::abs(f(u));
  if (!(s.residual < 1e-12 * n)) {
    std::ostringstream msg;
    msg << "steady_state: root finder stalled, residual " << s.residual
        << " at x = " << x << ", zeta = " << zeta;
    throw std::runtime_error(msg.str());
  }
  return s;
}

double steady_state_closed_form(const PhysicalParams& p, double lambda) {
  if (lambda < 0.0)
    throw std::domain_error("steady_state_closed_form: lambda must be >= 0");
  const double lcr = lambda_cr_open(p);
  if (lambda <= lcr) return 0.0;
  const double x = (lambda / lcr) * (lambda / lcr);
  return 0.5 * p.n_atoms * std::sqrt(1.0 - 1.0 / (x * x));
}

RenormalizedParams hp_renormalize(const PhysicalParams& p,
                                  const SteadyState& s, double lambda) {
  const double n = p.n_atoms;
  if (!(std::abs(s.beta) < n))
    throw std::domain_error("hp_renormalize: |beta| must be < N");
  const double root = std::sqrt(1.0 - s.beta * s.beta / (n * n));
  const double shift =
      lambda * s.alpha.real() * s.beta / (std::pow(n, 1.5) * root);
  RenormalizedParams r;
  r.omega0_t = p.omega0 - 2.0 * shift;
  r.lambda_t = lambda * (1.0 - 2.0 * s.beta * s.beta / (n * n)) / root;
  r.mu = -shift;
  return r;
}

}  // namespace dicke::meanfield
