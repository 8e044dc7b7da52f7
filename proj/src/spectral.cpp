#include "dicke/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "dicke/errors.hpp"
#include "dicke/meanfield.hpp"
#include "dicke/optim.hpp"
#include "dicke/parallel.hpp"
#include "dicke/quadrature.hpp"

namespace dicke::spectral {

namespace {

constexpr double kRelTol = 1e-8;
const cplx kI(0.0, 1.0);

cplx xi_factor(const EffectiveModel& m) {
  const cplx num = cplx(m.omega, -m.kappa);
  return num * num / (m.kappa * m.kappa + m.omega * m.omega);
}

}  // namespace

double EffectiveModel::x() const {
  return 4.0 * lambda * lambda * omega /
         ((kappa * kappa + omega * omega) * omega0);
}

double EffectiveModel::soft_mode() const {
  const double xv = x();
  if (xv > 1.0)
    throw SingularityError("soft mode closed: coupling beyond threshold");
  return omega0 * std::sqrt(1.0 - xv);
}

EffectiveModel make_model(const PhysicalParams& p, double x, double gamma,
                          double zeta_eff, double n_b, DenominatorMode mode) {
  p.validate();
  if (!(x >= 0.0)) throw std::domain_error("make_model: x must be >= 0");
  if (x >= 1.0)
    throw SingularityError("make_model: stationary fluctuation model needs x < 1");
  if (gamma < 0.0) throw std::domain_error("make_model: gamma must be >= 0");
  if (n_b < 0.0) throw std::domain_error("make_model: n_b must be >= 0");

  EffectiveModel m;
  m.omega = p.omega;
  m.omega0 = p.omega0;
  m.kappa = p.kappa;
  m.lambda = lambda_from_x(p, x);
  m.gamma = gamma;
  m.mode = (gamma == 0.0) ? DenominatorMode::exact : mode;
  m.n_b = n_b;
  m.n_th = (p.temperature > 0.0)
               ? thermal_occupation(soft_mode_frequency(p, x), p.temperature)
               : 0.0;
  m.alpha = meanfield::steady_state(p, m.lambda, zeta_eff).alpha;
  validate_stability(m);
  return m;
}

void validate_stability(const EffectiveModel& m) {
  if (m.gamma < 0.0 || m.n_th < 0.0 || m.n_b < 0.0)
    throw std::domain_error("model rates and occupations must be >= 0");
  const double lhs = 4.0 * m.lambda * m.lambda * m.omega * m.omega0;
  const double rhs = (m.gamma * m.gamma + m.omega0 * m.omega0) *
                     (m.kappa * m.kappa + m.omega * m.omega);
  if (!(lhs < rhs))
    throw SingularityError(
        "denominator has a real root: outside the stable normal phase");
  if (m.mode == DenominatorMode::soft_mode_approx) {
    if (m.x() > 1.0)
      throw SingularityError("approximate denominator requires x <= 1");
    if (m.gamma == 0.0 && m.lambda != 0.0)
      throw SingularityError(
          "undamped resonance at +-ws in the approximate denominator; "
          "use exact mode when gamma = 0");
  }
}

MatrixElements matrix_elements(const EffectiveModel& m, double nu) {
  const double w = m.omega, w0 = m.omega0, l = m.lambda, k = m.kappa,
               g = m.gamma;
  const cplx gm(g, -nu);
  const cplx atom = gm * gm + w0 * w0;
  cplx det;
  if (m.mode == DenominatorMode::exact) {
    const cplx km(k, -nu);
    det = atom * (km * km + w * w) - 4.0 * l * l * w * w0;
  } else {
    const double ws = m.soft_mode();
    det = (gm * gm + ws * ws) * (k * k + w * w);
  }
  if (!(std::abs(det) > 0.0))
    throw SingularityError("denominator vanished at nu = " +
                           std::to_string(nu) + " rad/s");

  const cplx cav(w + nu, k);  // i kappa + omega + nu
  MatrixElements e;
  e.det = det;
  e.m12 = 2.0 * kI * l * l * w0 / det;
  e.m11 = (2.0 * kI * l * l * w0 - kI * cav * atom) / det;
  e.m13 = kI * l * cav * cplx(nu + w0, g) / det;
  e.m14 = kI * l * cav * cplx(nu - w0, g) / det;
  return e;
}

void matrix_M(const EffectiveModel& m, double nu, cplx out[4][4]) {
  const cplx il = kI * m.lambda;
  out[0][0] = cplx(m.kappa, m.omega - nu);
  out[0][1] = 0.0;
  out[0][2] = il;
  out[0][3] = il;
  out[1][0] = 0.0;
  out[1][1] = cplx(m.kappa, -m.omega - nu);
  out[1][2] = -il;
  out[1][3] = -il;
  out[2][0] = il;
  out[2][1] = il;
  out[2][2] = cplx(m.gamma, m.omega0 - nu);
  out[2][3] = 0.0;
  out[3][0] = -il;
  out[3][1] = -il;
  out[3][2] = 0.0;
  out[3][3] = cplx(m.gamma, -m.omega0 - nu);
}

namespace {

struct Resonance {
  double nu_peak;
  double half_width;
};

// Locates the soft resonance as the minimum of |D| on [0, 2 omega0] and
// measures its half width at half maximum of 1/|D|^2.  A coarse scan seeds
// the bracket: with gamma = 0 the dip inherits only the cavity admixture
// linewidth (~Hz against a 100 kHz search range) and a bare golden-section
// search could step over it.
Resonance find_resonance(const EffectiveModel& m) {
  auto absd = [&m](double nu) { return std::abs(matrix_elements(m, nu).det); };
  const double hi = 2.0 * m.omega0;
  constexpr int n_scan = 512;
  int best = 0;
  double bestv = absd(0.0);
  for (int j = 1; j <= n_scan; ++j) {
    const double v = absd(hi * j / n_scan);
    if (v < bestv) {
      bestv = v;
      best = j;
    }
  }
  const double lo_b = hi * std::max(0, best - 2) / n_scan;
  const double hi_b = hi * std::min(n_scan, best + 2) / n_scan;
  Resonance r;
  r.nu_peak = optim::brent_min(absd, lo_b, hi_b, 1e-14);
  const double target = std::sqrt(2.0) * absd(r.nu_peak);

  double lo_r = 0.0, hi_r = hi / n_scan;
  const double cap = 10.0 * m.omega0;
  while (hi_r < cap && absd(r.nu_peak + hi_r) < target) {
    lo_r = hi_r;
    hi_r *= 2.0;
  }
  if (absd(r.nu_peak + hi_r) < target) {
    r.half_width = hi_r;  // broader than the search range; window caps it
  } else {
    r.half_width = optim::find_root(
        [&](double d) { return absd(r.nu_peak + d) - target; }, lo_r, hi_r);
  }
  return r;
}

std::vector<double> window_knots(const Resonance& r) {
  return {-r.nu_peak, 0.0, r.nu_peak};
}

double window_half_width(const EffectiveModel& m, const Resonance& r) {
  return std::max(20.0 * m.omega0,
                  r.nu_peak + 40.0 * std::max(m.gamma, r.half_width));
}

quad::Result integrate_or_throw(const std::function<cplx(double)>& f, double a,
                                double b, const std::vector<double>& knots,
                                double abs_tol, const char* what) {
  quad::Options opt;
  opt.rel_tol = kRelTol;
  opt.abs_tol = abs_tol;
  auto res = quad::integrate(f, a, b, knots, opt);
  if (!res.converged)
    throw std::runtime_error(std::string("quadrature for ") + what +
                             " did not converge: achieved error " +
                             std::to_string(res.error) + " after " +
                             std::to_string(res.n_eval) + " evaluations");
  return res;
}

}  // namespace

double correlation_window(const EffectiveModel& m) {
  return window_half_width(m, find_resonance(m));
}

OverlapIntegrals overlap_integrals(const EffectiveModel& m, double tau) {
  OverlapIntegrals o;
  if (m.lambda == 0.0) return o;
  validate_stability(m);

  const Resonance r = find_resonance(m);
  const double w = window_half_width(m, r);
  const auto knots = window_knots(r);

  auto el = [&m](double nu) { return matrix_elements(m, nu); };

  // tau-independent envelope integrals set the absolute error floor; at
  // large delay the oscillatory integrals decay below any pointwise relative
  // tolerance while the envelope keeps the target meaningful.
  auto envA = [&](double nu) { return cplx(std::norm(el(nu).m12), 0.0); };
  auto envB = [&](double nu) { return cplx(std::norm(el(nu).m14), 0.0); };
  auto envC = [&](double nu) {
    return cplx(std::abs(el(nu).m12 * el(-nu).m11), 0.0);
  };
  auto envD = [&](double nu) {
    return cplx(std::abs(el(nu).m14 * el(-nu).m13), 0.0);
  };
  const double eA = std::abs(integrate_or_throw(envA, -w, w, knots, 0.0, "A envelope").value);
  const double eB = std::abs(integrate_or_throw(envB, -w, 0.0, knots, 0.0, "B envelope").value);
  const double eC = std::abs(integrate_or_throw(envC, -w, w, knots, 0.0, "C envelope").value);
  const double eD = std::abs(integrate_or_throw(envD, -w, w, knots, 0.0, "D envelope").value);

  auto fA = [&](double nu) { return std::norm(el(nu).m12) * std::exp(kI * nu * tau); };
  auto fB = [&](double nu) { return std::norm(el(nu).m14) * std::exp(kI * nu * tau); };
  auto fC = [&](double nu) { return el(nu).m12 * el(-nu).m11 * std::exp(kI * nu * tau); };
  auto fD = [&](double nu) { return el(nu).m14 * el(-nu).m13 * std::exp(kI * nu * tau); };

  const cplx a_val = integrate_or_throw(fA, -w, w, knots, kRelTol * eA, "A").value;
  o.B = integrate_or_throw(fB, -w, 0.0, knots, kRelTol * eB, "B").value;
  o.C = integrate_or_throw(fC, -w, w, knots, kRelTol * eC, "C").value;
  o.Dv = integrate_or_throw(fD, -w, w, knots, kRelTol * eD, "D").value;

  if (std::abs(a_val.imag()) > 1e-8 * std::max(std::abs(a_val.real()), eA))
    throw std::runtime_error("overlap A acquired an imaginary part: " +
                             std::to_string(a_val.imag()));
  o.A = a_val.real();
  return o;
}

cplx g1_from_overlaps(const EffectiveModel& m, const OverlapIntegrals& o) {
  const double pi = 3.14159265358979323846;
  return (m.kappa / pi) * o.A +
         (m.gamma / pi) *
             ((1.0 + m.n_th) * o.B + m.n_th * std::conj(o.B)) +
         std::norm(m.alpha);
}

double g2_from_overlaps(const EffectiveModel& m, const OverlapIntegrals& o,
                        const OverlapIntegrals& o0) {
  const double pi = 3.14159265358979323846;
  const double g10 = std::abs(g1_from_overlaps(m, o0));
  const cplx g1t = g1_from_overlaps(m, o);
  const double a2 = std::norm(m.alpha);
  const cplx xi = xi_factor(m);
  const cplx pair = (m.kappa / pi) * o.C +
                    (m.gamma / pi) * ((1.0 + m.n_th) * o.Dv +
                                      m.n_th * xi * std::conj(o.B)) +
                    xi * a2;
  const double big_g2 =
      g10 * g10 + std::norm(g1t) - 2.0 * a2 * a2 + std::norm(pair);
  const double denom = g10 + m.n_b;
  if (denom == 0.0)
    throw std::domain_error("g2 undefined: zero mean detected intensity");
  return (big_g2 + 2.0 * g10 * m.n_b + m.n_b * m.n_b) / (denom * denom);
}

cplx g1(const EffectiveModel& m, double tau) {
  return g1_from_overlaps(m, overlap_integrals(m, tau));
}

double g2(const EffectiveModel& m, double tau) {
  const OverlapIntegrals o0 = overlap_integrals(m, 0.0);
  const OverlapIntegrals o = (tau == 0.0) ? o0 : overlap_integrals(m, tau);
  return g2_from_overlaps(m, o, o0);
}

double incoherent_photon_number(const EffectiveModel& m) {
  const OverlapIntegrals o0 = overlap_integrals(m, 0.0);
  return g1_from_overlaps(m, o0).real() - std::norm(m.alpha);
}

double density_fluctuation_variance(const EffectiveModel& m) {
  const double xv = m.x();
  if (xv <= 0.0)
    throw std::domain_error(
        "density_fluctuation_variance needs x > 0; the uncoupled limit has "
        "no cavity signal to infer from");
  return 4.0 * m.omega / (m.omega0 * xv) * incoherent_photon_number(m);
}

double b_quadrature_variance(const EffectiveModel& m) {
  validate_stability(m);
  const Resonance r = find_resonance(m);
  const double w = window_half_width(m, r);

  // spin-quadrature rows of the numeric inverse: sums of rows 3 and 4
  auto rows = [&m](double nu, cplx mrow[4]) {
    cplx mm[4][4];
    matrix_M(m, nu, mm);
    Eigen::Matrix4cd e;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) e(i, j) = mm[i][j];
    const Eigen::Matrix4cd inv = e.inverse();
    for (int j = 0; j < 4; ++j) mrow[j] = inv(2, j) + inv(3, j);
  };
  auto f = [&](double nu) {
    cplx p[4], q[4];
    rows(nu, p);
    rows(-nu, q);
    return 2.0 * m.kappa * p[0] * q[1] +
           2.0 * m.gamma * ((1.0 + m.n_th) * p[2] * q[3] +
                            m.n_th * p[3] * q[2]);
  };
  const double two_pi = 6.28318530717958647692;
  const auto res =
      integrate_or_throw(f, -w, w, window_knots(r), 0.0, "b quadrature");
  return res.value.real() / two_pi;
}

double occupation_spectrum(const EffectiveModel& m, double nu) {
  if (m.lambda == 0.0) return 0.0;
  const double th_neg = nu < 0.0 ? 1.0 : (nu == 0.0 ? 0.5 : 0.0);
  const double th_pos = 1.0 - th_neg;
  const auto e = matrix_elements(m, nu);
  double s = 2.0 * m.kappa * std::norm(e.m12) +
             2.0 * m.gamma * (1.0 + m.n_th) * std::norm(e.m14) * th_neg;
  if (m.gamma > 0.0 && m.n_th > 0.0 && th_pos > 0.0)
    s += 2.0 * m.gamma * m.n_th * std::norm(matrix_elements(m, -nu).m14) *
         th_pos;
  return s;
}

cplx pair_spectrum(const EffectiveModel& m, double nu) {
  if (m.lambda == 0.0) return 0.0;
  const double th_pos = nu > 0.0 ? 1.0 : (nu == 0.0 ? 0.5 : 0.0);
  const auto e = matrix_elements(m, nu);
  const auto en = matrix_elements(m, -nu);
  // element ordering mirrors the C and Dv overlap kernels, so the inverse
  // transform of this spectrum is exactly the pair term entering g2
  cplx p = 2.0 * m.kappa * e.m12 * en.m11 +
           2.0 * m.gamma * (1.0 + m.n_th) * e.m14 * en.m13;
  if (m.gamma > 0.0 && m.n_th > 0.0 && th_pos > 0.0)
    p += 2.0 * m.gamma * m.n_th * xi_factor(m) * std::norm(en.m14) * th_pos;
  return p;
}

OverlapIntegrals FluctuationCurves::at(std::size_t i) const {
  OverlapIntegrals o;
  o.A = A.at(i);
  o.B = B.at(i);
  o.C = C.at(i);
  o.Dv = Dv.at(i);
  return o;
}

FluctuationCurves overlap_curves(const EffectiveModel& m,
                                 const std::vector<double>& tau) {
  FluctuationCurves curves;
  curves.tau = tau;
  curves.A.assign(tau.size(), 0.0);
  curves.B.assign(tau.size(), 0.0);
  curves.C.assign(tau.size(), 0.0);
  curves.Dv.assign(tau.size(), 0.0);
  if (m.lambda == 0.0 || tau.empty()) return curves;
  validate_stability(m);

  const Resonance r = find_resonance(m);
  const double w = window_half_width(m, r);
  double tau_max = 0.0;
  for (double t : tau) tau_max = std::max(tau_max, std::abs(t));
  const double max_width =
      tau_max > 0.0 ? 4.0 / tau_max : std::numeric_limits<double>::infinity();

  auto el = [&m](double nu) { return matrix_elements(m, nu); };
  // combined envelope: refine wherever any kernel carries weight
  auto env = [&](double nu) {
    const auto e = el(nu);
    const auto en = el(-nu);
    double s = std::norm(e.m12) + std::abs(e.m12 * en.m11) +
               std::abs(e.m14 * en.m13);
    if (nu < 0.0) s += std::norm(e.m14);
    return cplx(s, 0.0);
  };
  const auto grid =
      quad::adaptive_grid(env, -w, w, window_knots(r), kRelTol, max_width);

  const std::size_t n_nodes = grid.nodes.size();
  std::vector<double> kA(n_nodes), kBr(n_nodes);
  std::vector<cplx> kC(n_nodes), kD(n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double nu = grid.nodes[i];
    const auto e = el(nu);
    const auto en = el(-nu);
    kA[i] = std::norm(e.m12);
    kBr[i] = nu < 0.0 ? std::norm(e.m14) : 0.0;
    kC[i] = e.m12 * en.m11;
    kD[i] = e.m14 * en.m13;
  }

  parallel::parallel_for(tau.size(), [&](std::size_t it) {
    const double t = tau[it];
    double acc_a = 0.0;
    cplx acc_b = 0.0, acc_c = 0.0, acc_d = 0.0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
      const double ph = grid.nodes[i] * t;
      const cplx osc(std::cos(ph), std::sin(ph));
      const double wgt = grid.weights[i];
      acc_a += wgt * kA[i] * osc.real();
      if (kBr[i] != 0.0) acc_b += wgt * kBr[i] * osc;
      acc_c += wgt * kC[i] * osc;
      acc_d += wgt * kD[i] * osc;
    }
    curves.A[it] = acc_a;
    curves.B[it] = acc_b;
    curves.C[it] = acc_c;
    curves.Dv[it] = acc_d;
  });
  return curves;
}

CorrelationCurve correlation_curve(const EffectiveModel& m, double tau_max,
                                   std::size_t n_points) {
  if (!(tau_max > 0.0) || n_points < 2)
    throw std::invalid_argument(
        "correlation_curve needs tau_max > 0 and at least two points");
  std::vector<double> tau(n_points);
  for (std::size_t i = 0; i < n_points; ++i)
    tau[i] = tau_max * static_cast<double>(i) /
             static_cast<double>(n_points - 1);

  const auto curves = overlap_curves(m, tau);
  const auto o0 = curves.at(0);

  CorrelationCurve c;
  c.tau = tau;
  c.g1.resize(n_points);
  c.g2.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    const auto oi = curves.at(i);
    c.g1[i] = g1_from_overlaps(m, oi);
    c.g2[i] = g2_from_overlaps(m, oi, o0);
  }
  c.photon_number = g1_from_overlaps(m, o0).real();
  c.coherent_fraction = std::norm(m.alpha);
  c.x = m.x();
  return c;
}

}  // namespace dicke::spectral
