#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <gsl/gsl_sf_lambert.h>

#include "errors.hpp"

namespace mesozeta {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct EvaluationPrecision {
  double abs_tol = 1e-8;
  int max_terms = 1 << 20;

  void validate() const {
    if (!(abs_tol > 0)) throw Error(ErrorKind::range_error, "abs_tol must be > 0");
    if (max_terms < 1) throw Error(ErrorKind::range_error, "max_terms must be >= 1");
  }
};

// ---------------------------------------------------------------- gamma family

inline cplx digamma(cplx z) {
  cplx acc = 0.0;
  if (z.real() < 0.5) {
    // reflection
    return digamma(1.0 - z) - kPi / std::tan(kPi * z);
  }
  while (std::abs(z) < 10.0) {
    acc -= 1.0 / z;
    z += 1.0;
  }
  cplx w = 1.0 / (z * z);
  cplx s = w * (1.0 / 12 - w * (1.0 / 120 - w * (1.0 / 252 - w * (1.0 / 240 - w * (1.0 / 132 - w * (691.0 / 32760 - w / 12.0))))));
  return acc + std::log(z) - 0.5 / z - s;
}

// principal-continuous log Gamma for Re z > 0
inline cplx lgamma_c(cplx z) {
  cplx acc = 0.0;
  while (std::abs(z) < 10.0) {
    acc -= std::log(z);
    z += 1.0;
  }
  cplx w = 1.0 / (z * z);
  cplx ser = (1.0 / z) * (1.0 / 12 - w * (1.0 / 360 - w * (1.0 / 1260 - w * (1.0 / 1680 - w * (1.0 / 1188 - w * (691.0 / 360360 - w / 156.0))))));
  return acc + (z - 0.5) * std::log(z) - z + 0.5 * std::log(kTwoPi) + ser;
}

// ---------------------------------------------------------------- theta

namespace detail {

inline long double theta_asym(long double t) {
  const long double pi = 3.14159265358979323846264338327950288L;
  long double it = 1.0L / t, it2 = it * it;
  long double corr = it * (1.0L / 48 + it2 * (7.0L / 5760 + it2 * (31.0L / 80640 + it2 * (127.0L / 430080 + it2 * (511.0L / 1216512)))));
  return 0.5L * t * std::log(t / (2 * pi)) - 0.5L * t - pi / 8 + corr;
}

}  // namespace detail

inline double riemann_siegel_theta(double t) {
  double a = std::fabs(t);
  double v;
  if (a >= 10.0) {
    v = static_cast<double>(detail::theta_asym(a));
  } else {
    v = lgamma_c(cplx(0.25, 0.5 * a)).imag() - 0.5 * a * std::log(kPi);
  }
  return t < 0 ? -v : v;
}

// hi/lo split of theta, used to keep the Riemann-Siegel phases accurate at large t
inline void theta_split(double t, double& hi, double& lo) {
  if (std::fabs(t) >= 10.0) {
    long double th = detail::theta_asym(std::fabs(t));
    if (t < 0) th = -th;
    hi = static_cast<double>(th);
    lo = static_cast<double>(th - hi);
  } else {
    hi = riemann_siegel_theta(t);
    lo = 0;
  }
}

// theta'(t) = Omega(t)/2
inline double omega(double xi) { return digamma(cplx(0.25, 0.5 * xi)).real() - std::log(kPi); }

// ---------------------------------------------------------------- Z

namespace detail {

inline double fl_round(double y) {
  constexpr double M = 6755399441055744.0;  // 1.5 * 2^52
  return (y + M) - M;
}
// floor for arguments that are multiples of 1/4
inline double fl_quarter(double y) { return fl_round(y - 0.375); }

// cos with Cody-Waite reduction by pi/2 and branch-free quadrant select; written
// so that gcc vectorises the calling loop
inline double fast_cos(double x) {
  constexpr double two_over_pi = 0.63661977236758134;
  constexpr double p1 = 0x1.921fb50000000p+0, p2 = 0x1.110b460000000p-26, p3 = 6.123233995736766e-17;
  double k = fl_round(x * two_over_pi);
  double r = ((x - k * p1) - k * p2) - k * p3;
  double z = r * r;
  double s = r * (1 + z * (-1.0 / 6 + z * (1.0 / 120 + z * (-1.0 / 5040 + z * (1.0 / 362880 + z * (-1.0 / 39916800 + z * (1.0 / 6227020800.0 + z * (-1.0 / 1307674368000.0))))))));
  double c = 1 + z * (-0.5 + z * (1.0 / 24 + z * (-1.0 / 720 + z * (1.0 / 40320 + z * (-1.0 / 3628800 + z * (1.0 / 479001600 + z * (-1.0 / 87178291200.0 + z * (1.0 / 20922789888000.0))))))));
  double q = k - 4.0 * fl_quarter(k * 0.25);
  double odd = q - 2.0 * fl_quarter(q * 0.5);
  double m = fl_quarter((q + 1.0) * 0.5);
  double neg = m - 2.0 * fl_quarter(m * 0.5);
  double v = c + odd * (s - c);
  return v * (1.0 - 2.0 * neg);
}

struct RSTable {
  static constexpr int kMax = 12800;  // covers t up to ~1e9
  std::vector<double> lg_hi, lg_lo, rs;
  RSTable() : lg_hi(kMax + 1), lg_lo(kMax + 1), rs(kMax + 1) {
    for (int n = 1; n <= kMax; ++n) {
      long double l = std::log(static_cast<long double>(n));
      lg_hi[n] = static_cast<double>(l);
      lg_lo[n] = static_cast<double>(l - lg_hi[n]);
      rs[n] = static_cast<double>(1.0L / std::sqrt(static_cast<long double>(n)));
    }
  }
  static const RSTable& get() {
    static const RSTable tab;
    return tab;
  }
};

// terms[i] = rs[n] cos(theta - t log n) for n = i+1, with the phase formed in
// double-double and reduced mod 2pi before the cosine
inline void rs_terms(const double* __restrict lh, const double* __restrict ll, const double* __restrict rs,
                     double* __restrict out, int N, double t, double th_hi, double th_lo) {
  constexpr double P1 = 0x1.921fb5p+2, P2 = 0x1.110b46p-24, P3 = 0x1.1a62633145c07p-52;  // 2pi = P1+P2+P3
  constexpr double inv2pi = 0.15915494309189535;
  for (int i = 0; i < N; ++i) {
    double p = t * lh[i];
    double pe = std::fma(t, lh[i], -p);
    double s = th_hi - p;
    double bb = s - th_hi;
    double se = (th_hi - (s - bb)) + (-p - bb);
    double k = fl_round(s * inv2pi);
    double r = std::fma(-k, P1, s);
    r = std::fma(-k, P2, r);
    r = std::fma(-k, P3, r);
    r += (se - pe) + (th_lo - t * ll[i]);
    out[i] = rs[i] * fast_cos(r);
  }
}

inline double kahan_sum(const double* x, int N) {
  double sum[8] = {0}, comp[8] = {0};
  int n0 = 0;
  for (; n0 + 8 <= N; n0 += 8) {
    for (int l = 0; l < 8; ++l) {
      double y = x[n0 + l] - comp[l];
      double tt = sum[l] + y;
      comp[l] = (tt - sum[l]) - y;
      sum[l] = tt;
    }
  }
  double s = 0, c = 0;
  auto add = [&](double v) {
    double y = v - c;
    double tt = s + y;
    c = (tt - s) - y;
    s = tt;
  };
  for (int l = 0; l < 8; ++l) add(sum[l]);
  for (int l = 0; l < 8; ++l) add(-comp[l]);
  for (; n0 < N; ++n0) add(x[n0]);
  return s;
}

// Taylor coefficients in u = p - 1/2 of the Riemann-Siegel correction terms C0..C4
struct RSCorrections {
  static constexpr int K = 64;
  std::array<std::array<double, K>, 5> c{};

  RSCorrections() {
    // Psi(1/2+u) = -cos(2 pi u^2 - 5 pi/8) / cos(2 pi u), entire; Cauchy DFT on |u| = 1
    constexpr int M = 256;
    std::vector<cplx> f(M);
    for (int m = 0; m < M; ++m) {
      cplx u = std::polar(1.0, kTwoPi * m / M);
      f[m] = -std::cos(kTwoPi * u * u - 5.0 * kPi / 8.0) / std::cos(kTwoPi * u);
    }
    std::array<double, K + 16> a{};
    for (int j = 0; j < K + 16; ++j) {
      cplx s = 0;
      for (int m = 0; m < M; ++m) s += f[m] * std::polar(1.0, -kTwoPi * double(j) * m / M);
      a[j] = (s / double(M)).real();
    }
    auto D = [&](int order, int i) {
      // coefficient of u^i in Psi^(order)
      double v = a[i + order];
      for (int q = 1; q <= order; ++q) v *= double(i + q);
      return v;
    };
    const double pi2 = kPi * kPi, pi4 = pi2 * pi2, pi6 = pi4 * pi2, pi8 = pi4 * pi4;
    for (int i = 0; i < K; ++i) {
      c[0][i] = D(0, i);
      c[1][i] = -D(3, i) / (96 * pi2);
      c[2][i] = D(2, i) / (64 * pi2) + D(6, i) / (18432 * pi4);
      c[3][i] = -D(1, i) / (64 * pi2) - D(5, i) / (3840 * pi4) - D(9, i) / (5308416 * pi6);
      c[4][i] = D(0, i) / (128 * pi2) + 19 * D(4, i) / (24576 * pi4) + 11 * D(8, i) / (5898240 * pi6) +
                D(12, i) / (2038431744.0 * pi8);
    }
  }
  double eval(int k, double u) const {
    double s = 0;
    for (int i = K - 1; i >= 0; --i) s = s * u + c[k][i];
    return s;
  }
  static const RSCorrections& get() {
    static const RSCorrections rc;
    return rc;
  }
};

// zeta(1/2 + it) by Euler-Maclaurin
inline cplx zeta_em(double t) {
  const cplx s(0.5, t);
  const int M = 20 + static_cast<int>(std::fabs(t) / 1.5);
  cplx sum = 0;
  for (int n = 1; n < M; ++n) sum += std::exp(-s * std::log(double(n)));
  const double lM = std::log(double(M));
  cplx Ms = std::exp(-s * lM);
  sum += double(M) * Ms / (s - 1.0) + 0.5 * Ms;
  // B_{2k}/(2k)!
  static constexpr double B[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6,
                                 -3617.0 / 510, 43867.0 / 798, -174611.0 / 330, 854513.0 / 138, -236364091.0 / 2730};
  cplx poch = s;  // s(s+1)...(s+2k-2)
  cplx pw = Ms / double(M);  // M^{-s-1}
  double fact = 2;  // (2k)!
  for (int k = 1; k <= 12; ++k) {
    sum += B[k - 1] / fact * poch * pw;
    poch *= (s + double(2 * k - 1)) * (s + double(2 * k));
    pw /= double(M) * double(M);
    fact *= double(2 * k + 1) * double(2 * k + 2);
  }
  return sum;
}

// below this height the Euler-Maclaurin sum is cheaper than getting the
// Riemann-Siegel remainder under 1e-10
inline constexpr double kRSCrossover = 1000.0;

}  // namespace detail

// estimate of the attainable absolute error of riemann_siegel_Z at height t
inline double rs_error_estimate(double t) {
  t = std::fabs(t);
  if (t < detail::kRSCrossover) return 1e-12;
  double tau = std::sqrt(t / kTwoPi);
  // first omitted correction is O(tau^{-11/2}); then summation rounding and the
  // long double theta
  return 2e-4 * std::pow(tau, -5.5) + 1e-15 * std::sqrt(tau) * (1 + std::log(t)) + 1e-19 * t * std::log(t);
}

inline double riemann_siegel_Z(double t, const EvaluationPrecision& prec = {}) {
  if (prec.abs_tol < rs_error_estimate(t))
    throw Error(ErrorKind::precision_unreachable,
                "abs_tol " + std::to_string(prec.abs_tol) + " below attainable error at t=" + std::to_string(t));
  t = std::fabs(t);  // Z is even
  if (t < detail::kRSCrossover) {
    cplx z = detail::zeta_em(t) * std::polar(1.0, riemann_siegel_theta(t));
    return z.real();
  }
  const auto& tab = detail::RSTable::get();
  double tau = std::sqrt(t / kTwoPi);
  int N = static_cast<int>(tau);
  if (N > detail::RSTable::kMax || N > prec.max_terms)
    throw Error(ErrorKind::precision_unreachable, "main sum length exceeds limits at t=" + std::to_string(t));
  double th_hi, th_lo;
  theta_split(t, th_hi, th_lo);
  thread_local std::vector<double> buf;
  if (static_cast<int>(buf.size()) < N) buf.resize(N + 64);
  detail::rs_terms(tab.lg_hi.data() + 1, tab.lg_lo.data() + 1, tab.rs.data() + 1, buf.data(), N, t, th_hi, th_lo);
  double main = 2.0 * detail::kahan_sum(buf.data(), N);
  double u = tau - N - 0.5;
  const auto& rc = detail::RSCorrections::get();
  double it = 1.0 / tau;
  double rem = rc.eval(0, u) + it * (rc.eval(1, u) + it * (rc.eval(2, u) + it * (rc.eval(3, u) + it * rc.eval(4, u))));
  rem /= std::sqrt(tau);
  return (N % 2 == 1) ? main + rem : main - rem;
}

// ---------------------------------------------------------------- Gram points

// g_n with theta(g_n) = n pi, n >= -1
inline double gram_point(long long n) {
  double x = (8.0 * double(n) + 1.0) / (8.0 * std::numbers::e);
  double g = kTwoPi * std::exp(1.0 + gsl_sf_lambert_W0(x));
  for (int it = 0; it < 60; ++it) {
    double th_hi, th_lo;
    theta_split(g, th_hi, th_lo);
    long double f = (static_cast<long double>(th_hi) + th_lo) - static_cast<long double>(n) * 3.14159265358979323846264338327950288L;
    double d = static_cast<double>(f) / (0.5 * omega(g));
    g -= d;
    if (std::fabs(d) < 1e-15 * g) break;
  }
  return g;
}

// ---------------------------------------------------------------- primes

inline double von_mangoldt(std::uint64_t n) {
  if (n < 2) return 0.0;
  std::uint64_t p = 0;
  if (n % 2 == 0) {
    p = 2;
  } else {
    for (std::uint64_t d = 3; d * d <= n; d += 2)
      if (n % d == 0) {
        p = d;
        break;
      }
    if (p == 0) return std::log(double(n));
  }
  while (n % p == 0) n /= p;
  return n == 1 ? std::log(double(p)) : 0.0;
}

// Lambda(n) for all n <= nmax by a smallest-prime-factor sieve
inline std::vector<double> mangoldt_table(std::uint64_t nmax) {
  std::vector<std::uint32_t> spf(nmax + 1, 0);
  std::vector<double> lam(nmax + 1, 0.0);
  for (std::uint64_t i = 2; i <= nmax; ++i) {
    if (spf[i] == 0) {
      for (std::uint64_t j = i; j <= nmax; j += i)
        if (spf[j] == 0) spf[j] = static_cast<std::uint32_t>(i);
    }
    std::uint64_t m = i, p = spf[i];
    while (m % p == 0) m /= p;
    if (m == 1) lam[i] = std::log(double(p));
  }
  return lam;
}

inline double chebyshev_psi(double x) {
  if (x < 2) return 0.0;
  auto nmax = static_cast<std::uint64_t>(std::floor(x));
  auto lam = mangoldt_table(nmax);
  double s = 0, c = 0;
  for (std::uint64_t n = 2; n <= nmax; ++n) {
    double y = lam[n] - c;
    double tt = s + y;
    c = (tt - s) - y;
    s = tt;
  }
  return s;
}

}  // namespace mesozeta
