#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace mesozeta {

struct GLRule {
  std::vector<double> x, w;  // on [-1, 1]
};

// n-point Gauss-Legendre rule, Newton on P_n; cached
inline const GLRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GLRule> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GLRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1, p2 = 0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1);
      double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2 / ((1 - z * z) * pp * pp);
  }
  return cache.emplace(n, std::move(r)).first->second;
}

// sum over GL panels of f on [a,b]
template <class F>
auto gl_panels(F&& f, double a, double b, int panels, int order = 20) {
  const auto& r = gauss_legendre(order);
  using R = decltype(f(a));
  R s{};
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h, c = lo + 0.5 * h;
    R ps{};
    for (int i = 0; i < order; ++i) ps += r.w[i] * f(c + 0.5 * h * r.x[i]);
    s += ps * (0.5 * h);
  }
  return s;
}

namespace detail {

inline constexpr double kGKx[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                   0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGKw[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                   0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                   0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                   0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGw[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                  0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
auto gk15(F& f, double a, double b, double& err) {
  using R = decltype(f(a));
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  R fc = f(c);
  R k = fc * kGKw[7], g = fc * kGw[3];
  for (int i = 0; i < 7; ++i) {
    R f1 = f(c - h * kGKx[i]), f2 = f(c + h * kGKx[i]);
    k += (f1 + f2) * kGKw[i];
    if (i % 2 == 1) g += (f1 + f2) * kGw[i / 2];
  }
  err = std::abs((k - g) * h);
  return R(k * h);
}

template <class F, class R>
R gk_rec(F& f, double a, double b, R whole, double err, double tol, double floor, int depth, int max_depth,
         long& evals) {
  if (err <= std::max(tol, floor) || (b - a) < 1e-14 * (std::fabs(a) + std::fabs(b))) return whole;
  if (depth >= max_depth)
    throw Error(ErrorKind::quadrature_nonconvergence,
                "adaptive quadrature exceeded depth " + std::to_string(max_depth) + " on [" + std::to_string(a) + "," +
                    std::to_string(b) + "]");
  double m = 0.5 * (a + b), e1, e2;
  R l = gk15(f, a, m, e1), r = gk15(f, m, b, e2);
  evals += 30;
  return gk_rec(f, a, m, l, e1, 0.5 * tol, floor, depth + 1, max_depth, evals) +
         gk_rec(f, m, b, r, e2, 0.5 * tol, floor, depth + 1, max_depth, evals);
}

}  // namespace detail

// adaptive Gauss-Kronrod 7/15; error target max(abs_tol, rel_tol*|I|)
template <class F>
auto integrate(F f, double a, double b, double abs_tol = 1e-12, double rel_tol = 1e-10, int max_depth = 30) {
  using R = decltype(f(a));
  if (a == b) return R{};
  double err;
  R whole = detail::gk15(f, a, b, err);
  double tol = std::max(abs_tol, rel_tol * std::abs(whole));
  long evals = 15;
  // no single subinterval is asked for more than 2^-20 of the budget, which
  // keeps kinks (where error only drops 4x per split) from exhausting depth
  R v = detail::gk_rec(f, a, b, whole, err, tol, tol * 0x1p-20, 0, max_depth, evals);
  return v;
}

// same, over consecutive breakpoints
template <class F>
auto integrate_pts(F f, const std::vector<double>& pts, double abs_tol = 1e-12, double rel_tol = 1e-10,
                   int max_depth = 30) {
  using R = decltype(f(pts.front()));
  R s{};
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    s += integrate(f, pts[i], pts[i + 1], abs_tol / double(pts.size()), rel_tol, max_depth);
  return s;
}

}  // namespace mesozeta
