#pragma once

// Small optimisation numerics used across the fitting and synthesis code:
//   - find_root:   safeguarded 1-D bracketing (bisection + secant step)
//   - brent_min:   1-D minimisation, golden section with parabolic steps
//   - nelder_mead: plain downhill simplex for the few-parameter fits
//   - lbfgs_min:   limited-memory quasi-Newton for the large smooth problems

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dicke::optim {

struct RootOptions {
  double xtol = 0.0;        // absolute bracket-width target
  double ftol = 0.0;        // |f| target; 0 means "machine-limited bracket"
  int max_iter = 200;
};

// Root of f on [lo,hi]; f(lo) and f(hi) must have opposite signs.  Secant
// steps are taken when they fall inside the bracket, bisection otherwise, so
// the bracket shrinks unconditionally.
template <class F>
double find_root(F&& f, double lo, double hi, const RootOptions& opt = {}) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw std::invalid_argument("find_root: endpoints do not bracket a root");

  double x = lo;
  for (int it = 0; it < opt.max_iter; ++it) {
    // secant candidate from the current bracket endpoints
    double xs = hi - fhi * (hi - lo) / (fhi - flo);
    const double xm = 0.5 * (lo + hi);
    if (!(xs > lo && xs < hi)) xs = xm;
    // keep a minimum step so a stagnating secant cannot stall the bracket
    const double minstep = 0.125 * (hi - lo);
    if (xs - lo < minstep) xs = lo + minstep;
    if (hi - xs < minstep) xs = hi - minstep;

    x = xs;
    const double fx = f(x);
    if (fx == 0.0 || (opt.ftol > 0.0 && std::abs(fx) < opt.ftol)) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    if (hi - lo <= opt.xtol + 4.0 * std::numeric_limits<double>::epsilon() *
                                  std::max(std::abs(lo), std::abs(hi)))
      break;
  }
  return 0.5 * (lo + hi);
}

// Brent's minimisation of f on [a,b]; returns the abscissa of the minimum.
template <class F>
double brent_min(F&& f, double a, double b, double tol = 1e-10,
                 int max_iter = 200) {
  const double gold = 0.3819660112501051;
  double x = a + gold * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const double xm = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-300;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool parabolic = false;
    if (std::abs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) &&
          p < q * (b - x)) {
        parabolic = true;
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (xm >= x) ? tol1 : -tol1;
      }
    }
    if (!parabolic) {
      e = (x >= xm) ? a - x : b - x;
      d = gold * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + ((d > 0) ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return x;
}

struct SimplexOptions {
  int max_iter = 600;
  double ftol = 1e-12;   // relative spread of simplex values
  double step = 0.25;    // initial simplex edge, per-coordinate scale
};

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Nelder-Mead with standard coefficients (1, 2, 0.5, 0.5).
inline SimplexResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, const SimplexOptions& opt = {}) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    double h = opt.step * std::max(1.0, std::abs(x0[i]));
    pts[i + 1][i] += h;
  }
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(pts[i]);

  SimplexResult res;
  std::vector<std::size_t> order(n + 1);
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it;
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0], worst = order[n], second = order[n - 1];
    const double spread = std::abs(fv[worst] - fv[best]);
    if (spread <= opt.ftol * (std::abs(fv[best]) + 1e-300) + 1e-300) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto along = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t d = 0; d < n; ++d)
        p[d] = centroid[d] + t * (pts[worst][d] - centroid[d]);
      return p;
    };

    auto xr = along(-1.0);
    const double fr = f(xr);
    if (fr < fv[best]) {
      auto xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) { pts[worst] = xe; fv[worst] = fe; }
      else { pts[worst] = xr; fv[worst] = fr; }
    } else if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      auto xc = along(outside ? -0.5 : 0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, fv[worst])) {
        pts[worst] = xc;
        fv[worst] = fc;
      } else {  // shrink toward best
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t d = 0; d < n; ++d)
            pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
          fv[i] = f(pts[i]);
        }
      }
    }
  }

  std::size_t ib = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (fv[i] < fv[ib]) ib = i;
  res.x = pts[ib];
  res.f = fv[ib];
  return res;
}

struct LbfgsOptions {
  int max_iter = 1000;
  int history = 20;        // stored correction pairs
  double grad_tol = 0.0;   // stop when max|g_i| falls below this
  double f_rel_tol = 1e-16;  // stop on relative decrease below this
};

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;  // a tolerance fired before the iteration cap
};

// Limited-memory BFGS with a backtracking Armijo line search.  `fg` must
// write the gradient into its second argument and return the value.  The
// inverse-Hessian seed is rescaled each iteration by the standard
// (s.y)/(y.y) factor; pairs with non-positive curvature are dropped.
inline LbfgsResult lbfgs_min(
    const std::function<double(const std::vector<double>&,
                               std::vector<double>&)>& fg,
    std::vector<double> x0, const LbfgsOptions& opt = {}) {
  const std::size_t n = x0.size();
  const std::size_t m = static_cast<std::size_t>(std::max(1, opt.history));
  std::vector<std::vector<double>> S, Y;
  std::vector<double> rho;

  std::vector<double> g(n), gnew(n), d(n), xnew(n);
  double f = fg(x0, g);
  double h0 = 1.0;

  LbfgsResult res;
  res.x = x0;
  res.f = f;

  std::vector<double> alpha_buf;
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it;
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax <= opt.grad_tol) {
      res.converged = true;
      break;
    }

    // two-loop recursion: d = -H g
    d = g;
    const std::size_t k = S.size();
    alpha_buf.assign(k, 0.0);
    for (std::size_t i = k; i-- > 0;) {
      double a = 0.0;
      for (std::size_t j = 0; j < n; ++j) a += S[i][j] * d[j];
      a *= rho[i];
      alpha_buf[i] = a;
      for (std::size_t j = 0; j < n; ++j) d[j] -= a * Y[i][j];
    }
    for (std::size_t j = 0; j < n; ++j) d[j] *= h0;
    for (std::size_t i = 0; i < k; ++i) {
      double b = 0.0;
      for (std::size_t j = 0; j < n; ++j) b += Y[i][j] * d[j];
      b *= rho[i];
      for (std::size_t j = 0; j < n; ++j) d[j] += (alpha_buf[i] - b) * S[i][j];
    }
    for (double& v : d) v = -v;

    double dg = 0.0;
    for (std::size_t j = 0; j < n; ++j) dg += d[j] * g[j];
    if (!(dg < 0.0)) {  // not a descent direction: restart from steepest
      S.clear(); Y.clear(); rho.clear();
      double gn2 = 0.0;
      for (double v : g) gn2 += v * v;
      const double scale = 1.0 / std::sqrt(gn2 + 1e-300);
      dg = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        d[j] = -g[j] * scale;
        dg += d[j] * g[j];
      }
    }

    // Armijo backtracking from a unit quasi-Newton step; a failed search is
    // retried once from normalised steepest descent with the history cleared,
    // since stale curvature pairs can make the quasi-Newton direction
    // unusable long before the iterate is actually stationary
    double fnew = f;
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double step = 1.0;
      for (int ls = 0; ls < 40; ++ls) {
        for (std::size_t j = 0; j < n; ++j) xnew[j] = res.x[j] + step * d[j];
        fnew = fg(xnew, gnew);
        if (std::isfinite(fnew) && fnew <= f + 1e-4 * step * dg) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted && attempt == 0) {
        S.clear(); Y.clear(); rho.clear();
        h0 = 1.0;
        double gn2 = 0.0;
        for (double v : g) gn2 += v * v;
        const double scale = 1.0 / std::sqrt(gn2 + 1e-300);
        dg = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          d[j] = -g[j] * scale;
          dg += d[j] * g[j];
        }
      }
    }
    if (!accepted) break;  // stationary to rounding even along -g

    // curvature pair
    std::vector<double> s(n), y(n);
    double sy = 0.0, yy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      s[j] = xnew[j] - res.x[j];
      y[j] = gnew[j] - g[j];
      sy += s[j] * y[j];
      yy += y[j] * y[j];
    }
    if (sy > 1e-12 * std::sqrt(yy) * std::sqrt(std::inner_product(
                          s.begin(), s.end(), s.begin(), 0.0))) {
      if (S.size() == m) {
        S.erase(S.begin());
        Y.erase(Y.begin());
        rho.erase(rho.begin());
      }
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
      h0 = sy / yy;
    }

    const double drop = f - fnew;
    res.x = xnew;
    f = fnew;
    g = gnew;
    res.f = f;
    if (drop <= opt.f_rel_tol * (std::abs(f) + 1e-300)) {
      res.converged = true;
      break;
    }
  }
  res.f = f;
  return res;
}

}  // namespace dicke::optim
