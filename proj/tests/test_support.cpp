#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "dicke/config.hpp"
#include "dicke/constants.hpp"
#include "dicke/fft.hpp"
#include "dicke/io.hpp"
#include "dicke/optim.hpp"
#include "dicke/parallel.hpp"
#include "dicke/quadrature.hpp"
#include "dicke/rng.hpp"

using namespace dicke;
using cplx = std::complex<double>;

TEST_CASE("adaptive quadrature on smooth integrands") {
  auto r = quad::integrate([](double t) { return t * t; }, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(r.value.real() == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(r.value.imag() == 0.0);

  r = quad::integrate([](double t) { return 1.0 / (1.0 + t * t); }, -10.0,
                      10.0);
  CHECK(r.value.real() == doctest::Approx(2.0 * std::atan(10.0)).epsilon(1e-12));
}

TEST_CASE("oscillatory integrand with a complex closed form") {
  const cplx a(-1.0, 7.0);
  const double tmax = 20.0;
  auto r = quad::integrate([&](double t) { return std::exp(a * t); }, 0.0,
                           tmax);
  const cplx expected = (std::exp(a * tmax) - 1.0) / a;
  CHECK(r.converged);
  CHECK(std::abs(r.value - expected) < 1e-12 * std::abs(expected) + 1e-15);
}

TEST_CASE("knots let the subdivision find a sharp resonance") {
  const double eps = 1e-6;
  auto lorentz = [&](double t) { return eps / (t * t + eps * eps); };
  auto r = quad::integrate(lorentz, -1.0, 1.0, {0.0}, {.rel_tol = 1e-10});
  CHECK(r.converged);
  CHECK(r.value.real() ==
        doctest::Approx(2.0 * std::atan(1.0 / eps)).epsilon(1e-9));
}

TEST_CASE("reusable grid carries the quadrature weights") {
  const double eps = 1e-6;
  auto lorentz = [&](double t) { return cplx(eps / (t * t + eps * eps)); };
  auto grid = quad::adaptive_grid(lorentz, -1.0, 1.0, {0.0}, 1e-9, 0.5);
  REQUIRE(grid.nodes.size() == grid.weights.size());
  CHECK(std::accumulate(grid.weights.begin(), grid.weights.end(), 0.0) ==
        doctest::Approx(2.0).epsilon(1e-12));
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i)
    acc += grid.weights[i] * lorentz(grid.nodes[i]).real();
  CHECK(acc == doctest::Approx(2.0 * std::atan(1.0 / eps)).epsilon(1e-8));

  // max_width forces panels even where the integrand is flat
  auto flat = quad::adaptive_grid([](double) { return cplx(1.0); }, 0.0, 1.0,
                                  {}, 1e-3, 0.1);
  CHECK(flat.nodes.size() >= 150);  // 15-point panels, at least 10 of them
  for (double t : flat.nodes) CHECK((t >= 0.0 && t <= 1.0));
}

TEST_CASE("bracketing root finder") {
  const double root =
      optim::find_root([](double t) { return std::cos(t); }, 0.0, 3.0);
  CHECK(root == doctest::Approx(pi / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(
      optim::find_root([](double t) { return 1.0 + t * t; }, 0.0, 3.0),
      std::invalid_argument);
}

TEST_CASE("scalar minimizer") {
  const double m =
      optim::brent_min([](double t) { return (t - 2.0) * (t - 2.0) + 3.0; },
                       0.0, 5.0);
  CHECK(m == doctest::Approx(2.0).epsilon(1e-8));
  const double m2 = optim::brent_min([](double t) { return std::cos(t); }, 0.1,
                                     2.0 * pi - 0.1);
  CHECK(m2 == doctest::Approx(pi).epsilon(1e-8));
}

TEST_CASE("simplex minimizer handles the banana valley") {
  auto rosen = [](const std::vector<double>& v) {
    const double a = 1.0 - v[0];
    const double b = v[1] - v[0] * v[0];
    return a * a + 100.0 * b * b;
  };
  auto res = optim::nelder_mead(rosen, {-1.2, 1.0},
                                {.max_iter = 5000, .ftol = 1e-14, .step = 0.5});
  CHECK(std::abs(res.x[0] - 1.0) < 1e-3);
  CHECK(std::abs(res.x[1] - 1.0) < 1e-3);
  CHECK(res.f < 1e-6);

  auto quad3 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      s += (v[i] - double(i + 1)) * (v[i] - double(i + 1));
    return s;
  };
  auto r3 = optim::nelder_mead(quad3, {0.0, 0.0, 0.0}, {.max_iter = 2000});
  CHECK(r3.converged);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(r3.x[i] - double(i + 1)) < 1e-5);
}

TEST_CASE("seed derivation is deterministic and well separated") {
  std::uint64_t s = 0;
  CHECK(rng::splitmix64(s) == 0xe220a8397b1dcdafULL);
  CHECK(rng::splitmix64(s) == 0x6e789e6aa1b965f4ULL);

  const std::uint64_t a = rng::derive_seed(42, {1, 2});
  CHECK(a == rng::derive_seed(42, {1, 2}));
  CHECK(a != rng::derive_seed(42, {2, 1}));
  CHECK(a != rng::derive_seed(42, {1, 3}));
  CHECK(a != rng::derive_seed(43, {1, 2}));
  CHECK(a != rng::derive_seed(42, {1, 2, 0}));

  auto e1 = rng::make_engine(a);
  auto e2 = rng::make_engine(a);
  for (int i = 0; i < 5; ++i) CHECK(e1() == e2());
}

TEST_CASE("discrete Fourier transform") {
  std::vector<cplx> x = {1.0, 2.0, 3.0, 4.0};
  fft::forward(x);
  CHECK(std::abs(x[0] - cplx(10.0, 0.0)) < 1e-12);
  CHECK(std::abs(x[1] - cplx(-2.0, 2.0)) < 1e-12);
  CHECK(std::abs(x[2] - cplx(-2.0, 0.0)) < 1e-12);
  CHECK(std::abs(x[3] - cplx(-2.0, -2.0)) < 1e-12);

  // delta pulse spreads flat
  std::vector<cplx> d(8, 0.0);
  d[0] = 1.0;
  fft::forward(d);
  for (const auto& v : d) CHECK(std::abs(v - 1.0) < 1e-13);

  // round trip on awkward (prime) and smooth lengths, with Parseval check
  for (std::size_t n : {7ul, 128ul}) {
    std::vector<cplx> y(n);
    auto eng = rng::make_engine(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : y) v = cplx(u(eng), u(eng));
    auto orig = y;
    double power_t = 0.0;
    for (auto& v : y) power_t += std::norm(v);
    fft::forward(y);
    double power_f = 0.0;
    for (auto& v : y) power_f += std::norm(v);
    CHECK(power_f == doctest::Approx(double(n) * power_t).epsilon(1e-12));
    fft::inverse(y);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(y[i] / double(n) - orig[i]) < 1e-13);
  }
}

TEST_CASE("double formatting round trips exactly") {
  for (double v : {pi, 1.0 / 3.0, 1e-300, -0.1, 12345.6789, 0.0}) {
    const std::string s = io::fmt_g17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("fnv1a checksums match the reference vectors") {
  CHECK(io::fnv1a64("", 0) == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a64("a", 1) == 0xaf63dc4c8601ec8cULL);
  CHECK(io::hex64(0xcbf29ce484222325ULL) == "cbf29ce484222325");
  CHECK(io::hex64(0x1ULL) == "0000000000000001");
}

TEST_CASE("atomic file writes and checksumming") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dicke_support_test";
  const std::string path = (dir / "nested" / "out.txt").string();
  io::atomic_write_file(path, "hello\n");
  CHECK(io::read_file(path) == "hello\n");
  io::atomic_write_file(path, "rewritten");
  CHECK(io::read_file(path) == "rewritten");
  CHECK(io::fnv1a64_file(path) == io::fnv1a64("rewritten", 9));
  CHECK(!fs::exists(path + ".tmp"));
  fs::remove_all(dir);
  CHECK_THROWS_AS(io::read_file(path), std::runtime_error);
}

TEST_CASE("csv round trip") {
  io::Csv csv;
  csv.header = {"tau_s", "g2"};
  csv.rows = {{0.1, 1.0 / 3.0}, {1e-17, 2.0}, {-3.0, 0.0}};
  const std::string text = csv.serialize();
  const auto back = io::Csv::parse(text);
  REQUIRE(back.header == csv.header);
  REQUIRE(back.rows.size() == csv.rows.size());
  for (std::size_t i = 0; i < csv.rows.size(); ++i)
    for (std::size_t j = 0; j < csv.rows[i].size(); ++j)
      CHECK(back.rows[i][j] == csv.rows[i][j]);

  CHECK(back.has_column("g2"));
  CHECK(!back.has_column("g1"));
  CHECK(back.column("tau_s")[1] == 1e-17);
  CHECK_THROWS_AS(back.column("nope"), std::runtime_error);

  // comments and blank lines are skipped, CRLF tolerated
  const auto commented =
      io::Csv::parse("# duration_ns=123\n\na,b\r\n1,2\n# trailing\n3,4\n");
  REQUIRE(commented.header == std::vector<std::string>{"a", "b"});
  REQUIRE(commented.rows.size() == 2);
  CHECK(commented.rows[1][1] == 4.0);

  CHECK_THROWS_AS(io::Csv::parse("a,b\n1,oops\n"), std::runtime_error);
}

TEST_CASE("config parsing") {
  const auto cfg = config::Config::parse(
      "# comment\n"
      "omega_hz = 1.0e7   # trailing comment\n"
      "n = 160000\n"
      "flag = On\n"
      "name = \"soft mode\"\n",
      "inline");
  CHECK(cfg.get_double("omega_hz") == 1.0e7);
  CHECK(cfg.get_int("n", 0) == 160000);
  CHECK(cfg.get_bool("flag", false));
  CHECK(cfg.get_string("name") == "soft mode");
  CHECK(cfg.get_double("missing", 2.5) == 2.5);
  CHECK(cfg.get_string("missing", "dflt") == "dflt");
  CHECK(cfg.has("n"));
  CHECK(!cfg.has("missing"));
  cfg.require_all_consumed();

  CHECK_THROWS_AS(config::Config::parse("a = 1\na = 2\n", "x"),
                  config::ConfigError);
  CHECK_THROWS_AS(config::Config::parse("just words\n", "x"),
                  config::ConfigError);
  CHECK_THROWS_AS(cfg.get_double("absent"), config::ConfigError);

  auto cfg2 = config::Config::parse("a = 1\nb = 2\n", "x");
  CHECK(cfg2.get_double("a") == 1.0);
  try {
    cfg2.require_all_consumed();
    FAIL("expected unused-key error");
  } catch (const config::ConfigError& e) {
    CHECK(std::string(e.what()).find("b") != std::string::npos);
  }
  cfg2.set("b", "3");  // consuming after an override works
  CHECK(cfg2.get_double("b") == 3.0);

  auto bad = config::Config::parse("v = twelve\n", "x");
  CHECK_THROWS_AS(bad.get_double("v"), config::ConfigError);
}

TEST_CASE("parallel for") {
  std::vector<double> out(1000, 0.0);
  parallel::parallel_for(out.size(), [&](std::size_t i) {
    out[i] = double(i) * double(i);
  });
  double s = std::accumulate(out.begin(), out.end(), 0.0);
  CHECK(s == doctest::Approx(999.0 * 1000.0 * 1999.0 / 6.0));

  CHECK_THROWS_AS(parallel::parallel_for(
                      100,
                      [](std::size_t i) {
                        if (i == 37) throw std::runtime_error("boom");
                      },
                      4),
                  std::runtime_error);

  CHECK(parallel::thread_count(5) == 5u);
  setenv("DICKE_LAB_THREADS", "3", 1);
  CHECK(parallel::thread_count() == 3u);
  unsetenv("DICKE_LAB_THREADS");
  CHECK(parallel::thread_count() >= 1u);
}
