#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "dicke/constants.hpp"
#include "dicke/errors.hpp"
#include "dicke/params.hpp"
#include "dicke/quadrature.hpp"
#include "dicke/spectral.hpp"

using namespace dicke;
using namespace dicke::spectral;

namespace {

PhysicalParams cold_params() {
  auto p = default_params();
  p.temperature = 0.0;
  return p;
}

// least-squares slope of log y against log(1-x)
double loglog_slope(const std::vector<double>& xs,
                    const std::vector<double>& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double lx = std::log(1.0 - xs[i]);
    const double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// operating point all pinned values below refer to
EffectiveModel probe_model() {
  return make_model(default_params(), 0.9, two_pi * 200.0);
}

}  // namespace

TEST_CASE("matrix elements invert the response matrix") {
  const auto p = default_params();
  const auto m = make_model(p, 0.9, two_pi * 200.0, 0.0, 0.0,
                            DenominatorMode::exact);
  auto eng = std::mt19937_64(12345);
  std::uniform_real_distribution<double> u(-2.5e6, 2.5e6);
  for (int k = 0; k < 100; ++k) {
    const double nu = u(eng);
    cplx mm[4][4];
    matrix_M(m, nu, mm);
    Eigen::Matrix4cd e;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) e(i, j) = mm[i][j];
    const Eigen::Matrix4cd inv = e.inverse();
    const auto el = matrix_elements(m, nu);
    CHECK(std::abs(el.m11 - inv(0, 0)) <= 1e-10 * std::abs(inv(0, 0)));
    CHECK(std::abs(el.m12 - inv(0, 1)) <= 1e-10 * std::abs(inv(0, 1)));
    CHECK(std::abs(el.m13 - inv(0, 2)) <= 1e-10 * std::abs(inv(0, 2)));
    CHECK(std::abs(el.m14 - inv(0, 3)) <= 1e-10 * std::abs(inv(0, 3)));
    CHECK(std::abs(el.det - e.determinant()) <=
          1e-10 * std::abs(e.determinant()));
  }
}

TEST_CASE("decoupled cavity is a bare Lorentzian response") {
  const auto p = default_params();
  const auto m = make_model(p, 0.0, two_pi * 200.0, 0.0, 0.0,
                            DenominatorMode::exact);
  // the approximate denominator flattens the cavity factor to kappa^2 +
  // omega^2, so only the exact mode reduces to the bare response
  const auto soft = make_model(p, 0.0, two_pi * 200.0);
  for (double nu : {0.0, 0.3 * p.omega0, -2.0 * p.omega0}) {
    const auto el = matrix_elements(m, nu);
    const cplx expected = 1.0 / cplx(p.kappa, p.omega - nu);
    CHECK(std::abs(el.m11 - expected) < 1e-14 * std::abs(expected));
    CHECK(el.m12 == cplx(0.0, 0.0));
    CHECK(el.m13 == cplx(0.0, 0.0));
    CHECK(el.m14 == cplx(0.0, 0.0));
    const auto es = matrix_elements(soft, nu);
    CHECK(std::abs(es.m11 - expected) <
          (2.0 * std::abs(nu) * p.kappa + nu * nu) /
                  (p.kappa * p.kappa + p.omega * p.omega) *
              std::abs(expected) +
          1e-14 * std::abs(expected));
  }
}

TEST_CASE("approximate denominator stays within a percent of the full one") {
  const auto p = default_params();
  const auto soft = make_model(p, 0.9, two_pi * 200.0);
  const auto exact = make_model(p, 0.9, two_pi * 200.0, 0.0, 0.0,
                                DenominatorMode::exact);
  const double ws = soft.soft_mode();
  const double r = std::norm(matrix_elements(soft, ws).m12) /
                   std::norm(matrix_elements(exact, ws).m12);
  CHECK(r == doctest::Approx(1.0076340).epsilon(1e-4));
  CHECK(std::abs(r - 1.0) < 0.01);

  const double a_soft = overlap_integrals(soft, 0.0).A;
  const double a_exact = overlap_integrals(exact, 0.0).A;
  CHECK(a_soft / a_exact == doctest::Approx(1.0038153).epsilon(1e-4));
}

TEST_CASE("overlap integrals at the operating point") {
  const auto m = probe_model();
  CHECK(m.n_th == doctest::Approx(0.3961655148).epsilon(1e-8));

  const auto o0 = overlap_integrals(m, 0.0);
  CHECK(o0.A == doctest::Approx(1.73371135e-9).epsilon(1e-6));
  CHECK(o0.B.real() == doctest::Approx(1.97907080e-6).epsilon(1e-6));
  CHECK(std::abs(o0.B.imag()) < 1e-8 * o0.B.real());
  CHECK(o0.C.real() == doctest::Approx(1.68095173e-9).epsilon(1e-6));
  CHECK(o0.C.imag() == doctest::Approx(4.26817647e-10).epsilon(1e-6));
  CHECK(o0.Dv.real() == doctest::Approx(2.47669999e-6).epsilon(1e-6));
  CHECK(o0.Dv.imag() == doctest::Approx(6.29003242e-7).epsilon(1e-6));

  const auto o = overlap_integrals(m, 50e-6);
  CHECK(o.A == doctest::Approx(1.19638659e-9).epsilon(1e-6));
  CHECK(o.B.real() == doctest::Approx(1.32410336e-6).epsilon(1e-6));
  CHECK(o.B.imag() == doctest::Approx(-1.39499364e-6).epsilon(1e-6));

  // A is even in the delay
  const auto om = overlap_integrals(m, -50e-6);
  CHECK(om.A == doctest::Approx(o.A).epsilon(1e-8));
}

TEST_CASE("mirrored spin-channel definitions carry the same weight") {
  const auto m = probe_model();
  const double w = correlation_window(m);
  const double b_neg = overlap_integrals(m, 0.0).B.real();
  // |m13(nu)|^2 above zero frequency mirrors |m14|^2 below it; the cavity
  // factor breaks the symmetry only at the permille level
  auto b_alt = quad::integrate(
      [&](double nu) { return cplx(std::norm(matrix_elements(m, nu).m13)); },
      0.0, w, {m.soft_mode()});
  CHECK(b_alt.value.real() / b_neg == doctest::Approx(1.0010476).epsilon(1e-4));
}

TEST_CASE("first-order coherence") {
  const auto m = probe_model();
  CHECK(g1(m, 0.0).real() == doctest::Approx(0.00575313838).epsilon(1e-6));
  CHECK(g1(m, 0.0).imag() == doctest::Approx(0.0).scale(0.005753));
  CHECK(incoherent_photon_number(m) ==
        doctest::Approx(0.00575313838).epsilon(1e-6));

  const cplx g = g1(m, 50e-6);
  CHECK(g.real() == doctest::Approx(0.00394025909).epsilon(1e-6));
  CHECK(g.imag() == doctest::Approx(-0.000557997457).epsilon(1e-6));

  // negative delays carry the conjugate correlation
  const cplx gm = g1(m, -50e-6);
  CHECK(gm.real() == doctest::Approx(g.real()).epsilon(1e-7));
  CHECK(gm.imag() == doctest::Approx(-g.imag()).epsilon(1e-7));
}

TEST_CASE("coherence decays to the condensate background") {
  const auto p = default_params();
  const auto m = make_model(p, 0.8, two_pi * 200.0, 60.0);
  CHECK(m.alpha.real() < 0.0);
  const double coh = std::norm(m.alpha);
  CHECK(coh > 0.0);
  const cplx tail = g1(m, 20.0 / m.gamma);
  CHECK(std::abs(tail - coh) < 1e-4 * g1(m, 0.0).real());
  CHECK(g1(m, 0.0).real() ==
        doctest::Approx(coh + incoherent_photon_number(m)).epsilon(1e-9));
}

TEST_CASE("uncoupled model has no incoherent field") {
  const auto m = make_model(default_params(), 0.0, two_pi * 200.0);
  CHECK(g1(m, 0.0) == cplx(0.0, 0.0));
  CHECK(incoherent_photon_number(m) == 0.0);
  // no field and no background leaves g2 undefined
  CHECK_THROWS_AS(g2(m, 0.0), std::domain_error);
  // a background-only stream is Poissonian
  const auto mb = make_model(default_params(), 0.0, two_pi * 200.0, 0.0,
                             4.3417e-4);
  CHECK(g2(mb, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("thermal field obeys the Gaussian-moment bound") {
  const auto m = probe_model();
  const double g20 = g2(m, 0.0);
  CHECK(g20 == doctest::Approx(3.10230661).epsilon(1e-6));
  CHECK(g20 >= 2.0);

  // the tau = 0 value decomposes into bunching plus the pair amplitude
  const auto o0 = overlap_integrals(m, 0.0);
  const double nbar = g1_from_overlaps(m, o0).real();
  const cplx xi = cplx(m.omega, -m.kappa) * cplx(m.omega, -m.kappa) /
                  (m.kappa * m.kappa + m.omega * m.omega);
  const cplx pair = m.kappa / pi * o0.C +
                    m.gamma / pi * ((1.0 + m.n_th) * o0.Dv +
                                    m.n_th * xi * std::conj(o0.B));
  CHECK(g20 ==
        doctest::Approx(2.0 + std::norm(pair) / (nbar * nbar)).epsilon(1e-9));
}

TEST_CASE("coherent light stays Poissonian for any background") {
  EffectiveModel m;
  const auto p = default_params();
  m.omega = p.omega;
  m.omega0 = p.omega0;
  m.kappa = p.kappa;
  m.gamma = two_pi * 200.0;
  m.lambda = 0.0;
  m.n_th = 0.27;
  m.alpha = cplx(-1.3, 0.4);
  for (double nb : {0.0, 0.5}) {
    m.n_b = nb;
    for (double tau : {0.0, 30e-6, 1e-3})
      CHECK(g2(m, tau) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("intensity correlations factorize at long delay") {
  const auto m = probe_model();
  CHECK(g2(m, 8e-3) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("background counts dilute the bunching") {
  const auto p = default_params();
  const auto m0 = probe_model();
  const double nbar = g1(m0, 0.0).real();
  const auto mb = make_model(p, 0.9, two_pi * 200.0, 0.0, nbar);
  // equal background halves the excess correlation twice over
  CHECK(g2(mb, 0.0) ==
        doctest::Approx((3.10230661 + 3.0) / 4.0).epsilon(1e-4));
  CHECK(g2(mb, 0.0) < g2(m0, 0.0));
  CHECK(g2(mb, 0.0) > 1.0);
}

TEST_CASE("photon number diverges with exponent -1 in the lossless-spin limit") {
  const auto p = cold_params();
  const std::vector<double> xs = {0.9, 0.93, 0.96, 0.99};
  const std::vector<double> pinned = {1.14257812, 1.68666295, 3.04687500,
                                      12.56835937};
  std::vector<double> ns;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto m = make_model(p, xs[i], 0.0);
    CHECK(m.mode == DenominatorMode::exact);  // gamma = 0 forces it
    const double n = incoherent_photon_number(m);
    CHECK(n == doctest::Approx(pinned[i]).epsilon(1e-5));
    ns.push_back(n);
  }
  CHECK(loglog_slope(xs, ns) == doctest::Approx(-1.0384350).epsilon(5e-3));
}

TEST_CASE("spin quadrature variance") {
  // uncoupled spins at T = 0 hold vacuum noise; the window clips ~8e-4
  const auto m0 = make_model(cold_params(), 0.0, two_pi * 200.0);
  CHECK(b_quadrature_variance(m0) == doctest::Approx(0.99923107).epsilon(1e-5));

  // cavity adiabatically follows the spins: photon number is the quadrature
  // variance scaled by the low-frequency cavity response
  const auto m = make_model(cold_params(), 0.5, two_pi * 200.0, 0.0, 0.0,
                            DenominatorMode::exact);
  const double pred = m.lambda * m.lambda /
                      (m.kappa * m.kappa + m.omega * m.omega) *
                      b_quadrature_variance(m);
  CHECK(incoherent_photon_number(m) / pred == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("density fluctuations rescale the photon number") {
  const auto m = make_model(default_params(), 0.95, two_pi * 200.0);
  const double ratio = density_fluctuation_variance(m) /
                       incoherent_photon_number(m);
  CHECK(ratio == doctest::Approx(4.0 * m.omega / (m.omega0 * 0.95)).epsilon(1e-9));

  const auto m0 = make_model(default_params(), 0.0, two_pi * 200.0);
  CHECK_THROWS_AS(density_fluctuation_variance(m0), std::domain_error);
}

TEST_CASE("emission spectra integrate back to the correlators") {
  const auto m = make_model(default_params(), 0.8, two_pi * 200.0);
  const double w = correlation_window(m);
  const double ws = m.soft_mode();

  for (int k = -30; k <= 30; ++k)
    CHECK(occupation_spectrum(m, k * 1e5) >= 0.0);

  // the spectrum carries Theta pieces, so integrate each side separately
  auto sn = [&](double a, double b, std::vector<double> knots) {
    return quad::integrate(
               [&](double nu) { return cplx(occupation_spectrum(m, nu)); }, a,
               b, knots)
        .value.real();
  };
  const double total = (sn(-w, 0.0, {-ws}) + sn(0.0, w, {ws})) / two_pi;
  CHECK(total == doctest::Approx(incoherent_photon_number(m)).epsilon(1e-6));

  for (double tau : {0.0, 30e-6}) {
    auto pf = [&](double nu) {
      return pair_spectrum(m, nu) * std::exp(cplx(0.0, nu * tau));
    };
    const cplx lhs = (quad::integrate(pf, -w, 0.0, {-ws}).value +
                      quad::integrate(pf, 0.0, w, {ws}).value) /
                     two_pi;
    const auto o = overlap_integrals(m, tau);
    const cplx xi = cplx(m.omega, -m.kappa) * cplx(m.omega, -m.kappa) /
                    (m.kappa * m.kappa + m.omega * m.omega);
    const cplx rhs = m.kappa / pi * o.C +
                     m.gamma / pi * ((1.0 + m.n_th) * o.Dv +
                                     m.n_th * xi * std::conj(o.B));
    CHECK(std::abs(lhs - rhs) < 1e-6 * std::abs(rhs));
  }
}

TEST_CASE("batched overlap curves match the scalar integrals") {
  const auto m = probe_model();
  const std::vector<double> taus = {0.0, 17e-6, 60e-6, 190e-6};
  const auto curves = overlap_curves(m, taus);
  REQUIRE(curves.tau == taus);
  REQUIRE(curves.A.size() == taus.size());

  const auto scale = overlap_integrals(m, 0.0);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const auto o = overlap_integrals(m, taus[i]);
    CHECK(std::abs(curves.A[i] - o.A) < 3e-6 * scale.A);
    CHECK(std::abs(curves.B[i] - o.B) < 3e-6 * std::abs(scale.B));
    CHECK(std::abs(curves.C[i] - o.C) < 3e-6 * std::abs(scale.C));
    CHECK(std::abs(curves.Dv[i] - o.Dv) < 3e-6 * std::abs(scale.Dv));

    const auto oi = curves.at(i);
    CHECK(std::abs(g1_from_overlaps(m, oi) - g1(m, taus[i])) <
          1e-5 * g1(m, 0.0).real());
    CHECK(g2_from_overlaps(m, oi, curves.at(0)) ==
          doctest::Approx(g2(m, taus[i])).epsilon(3e-5));
  }
}

TEST_CASE("correlation curve on a uniform grid") {
  const auto m = probe_model();
  const auto c = correlation_curve(m, 4e-3, 160);
  REQUIRE(c.tau.size() == 160);
  REQUIRE(c.g1.size() == 160);
  REQUIRE(c.g2.size() == 160);
  CHECK(c.tau.front() == 0.0);
  CHECK(c.tau.back() == doctest::Approx(4e-3).epsilon(1e-12));
  const double step = c.tau[1] - c.tau[0];
  for (std::size_t i = 1; i < c.tau.size(); ++i)
    CHECK(c.tau[i] - c.tau[i - 1] == doctest::Approx(step).epsilon(1e-9));

  CHECK(c.x == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(c.coherent_fraction == 0.0);
  CHECK(c.photon_number == doctest::Approx(0.00575313838).epsilon(1e-5));
  CHECK(c.g1[0].real() == doctest::Approx(c.photon_number).epsilon(1e-9));
  CHECK(c.g2[0] == doctest::Approx(3.10230661).epsilon(1e-5));
  CHECK(c.g2.back() == doctest::Approx(1.0).epsilon(2e-3));
  for (std::size_t i = 0; i < c.g2.size(); ++i) {
    CHECK(std::isfinite(c.g2[i]));
    CHECK(c.g2[i] > 0.5);
    // 25 us steps sample the intensity beat at ~7 points per period, so
    // adjacent samples can differ by most of the oscillation amplitude
    if (i) CHECK(std::abs(c.g2[i] - c.g2[i - 1]) < 1.2);
  }
}

TEST_CASE("intensity beat tracks the soft mode") {
  const auto m = probe_model();
  const double ws = m.soft_mode();
  const auto c = correlation_curve(m, 5e-4, 501);

  // interior minima of g2, refined by a parabola through the neighbours;
  // the intensity beats at twice the field frequency, so successive minima
  // are half a field period apart
  std::vector<double> minima;
  for (std::size_t i = 1; i + 1 < c.g2.size(); ++i) {
    if (c.g2[i] <= c.g2[i - 1] && c.g2[i] < c.g2[i + 1]) {
      const double y0 = c.g2[i - 1], y1 = c.g2[i], y2 = c.g2[i + 1];
      const double denom = y0 - 2.0 * y1 + y2;
      const double shift = denom > 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
      minima.push_back(c.tau[i] + shift * (c.tau[1] - c.tau[0]));
    }
  }
  REQUIRE(minima.size() >= 2);
  const double spacing = minima[1] - minima[0];
  CHECK(pi / spacing == doctest::Approx(ws).epsilon(0.02));
}

TEST_CASE("model construction and stability guards") {
  const auto p = default_params();

  CHECK_THROWS_AS(make_model(p, 1.0, two_pi * 200.0), SingularityError);
  CHECK_THROWS_AS(make_model(p, 1.2, two_pi * 200.0), SingularityError);
  CHECK_THROWS_AS(make_model(p, -0.1, two_pi * 200.0), std::domain_error);
  CHECK_THROWS_AS(make_model(p, 0.5, -1.0), std::domain_error);
  CHECK_THROWS_AS(make_model(p, 0.5, two_pi * 200.0, 0.0, -0.1),
                  std::domain_error);

  const auto m = make_model(p, 0.77, two_pi * 200.0);
  CHECK(m.x() == doctest::Approx(0.77).epsilon(1e-12));
  CHECK(m.soft_mode() ==
        doctest::Approx(p.omega0 * std::sqrt(0.23)).epsilon(1e-12));

  // gamma = 0 silently switches to the full denominator
  const auto mg = make_model(p, 0.5, 0.0);
  CHECK(mg.mode == DenominatorMode::exact);

  // a hand-tuned coupling beyond threshold must be caught
  auto hot = make_model(p, 0.98, two_pi * 200.0, 0.0, 0.0,
                        DenominatorMode::exact);
  hot.lambda *= 1.2;
  CHECK_THROWS_AS(validate_stability(hot), SingularityError);
  CHECK_THROWS_AS(hot.soft_mode(), SingularityError);

  // undamped spins make the approximate denominator singular
  auto frozen = make_model(p, 0.5, two_pi * 200.0);
  frozen.gamma = 0.0;
  CHECK_THROWS_AS(validate_stability(frozen), SingularityError);

  // bath occupation is frozen at the soft-mode frequency
  CHECK(make_model(p, 0.0, two_pi * 200.0).n_th ==
        doctest::Approx(0.0189761).epsilon(1e-4));
  CHECK(make_model(cold_params(), 0.9, two_pi * 200.0).n_th == 0.0);
}
