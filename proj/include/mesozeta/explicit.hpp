#pragma once

// Two sides of the explicit formula for C^2 compactly supported pairings.
// Pairings are finite sums of bumps w (1 - ((x-c)/r)^2)^3, which are C^2
// with a jump in the third derivative, so ghat decays like xi^-4.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"
#include "specialfn.hpp"
#include "zeros.hpp"

namespace mesozeta {

struct Bump {
  double c, r, w;
};

namespace detail {
// \int_{-1}^{1} (1-u^2)^3 e^{-iku} du
inline cplx bump_integral(cplx k) {
  if (std::abs(k) < 8) {
    const auto& gl = gauss_legendre(40);
    cplx s = 0;
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
      double u = gl.x[i], p = 1 - u * u;
      s += gl.w[i] * p * p * p * std::exp(cplx(0, -1) * k * u);
    }
    return s;
  }
  // repeated integration by parts; p, p', p'' vanish at +-1
  // p''' = 72u - 120u^3, p'''' = 72 - 360u^2, p^(5) = -720u, p^(6) = -720
  const double d1[4] = {-48, -288, -720, -720}, dm1[4] = {48, -288, 720, -720};
  cplx em = std::exp(cplx(0, -1) * k), ep = std::exp(cplx(0, 1) * k), mik = cplx(0, -1) * k, s = 0;
  cplx pw = mik * mik * mik * mik;  // (-ik)^{j+1} at j = 3
  for (int j = 3; j <= 6; ++j) {
    cplx term = (d1[j - 3] * em - dm1[j - 3] * ep) / pw;
    s += (j % 2 ? -1.0 : 1.0) * term;
    pw *= mik;
  }
  return s;
}
}  // namespace detail

class PairingFunction {
 public:
  PairingFunction() = default;
  explicit PairingFunction(std::vector<Bump> b) : bumps_(std::move(b)) {
    for (auto& x : bumps_)
      if (!(x.r > 0) || !std::isfinite(x.c) || !std::isfinite(x.w))
        throw Error(ErrorKind::range_error, "g: bump needs r > 0 and finite centre and weight");
  }
  static PairingFunction bump(double c, double r, double w = 1) { return PairingFunction({{c, r, w}}); }

  const std::vector<Bump>& bumps() const { return bumps_; }
  bool empty() const { return bumps_.empty(); }
  double lo() const {
    double v = INFINITY;
    for (auto& b : bumps_) v = std::min(v, b.c - b.r);
    return empty() ? 0 : v;
  }
  double hi() const {
    double v = -INFINITY;
    for (auto& b : bumps_) v = std::max(v, b.c + b.r);
    return empty() ? 0 : v;
  }
  // half-width of the smallest symmetric interval holding the support
  double reach() const { return std::max(std::fabs(lo()), std::fabs(hi())); }

  double operator()(double x) const {
    double s = 0;
    for (auto& b : bumps_) {
      double y = (x - b.c) / b.r;
      if (std::fabs(y) < 1) {
        double p = 1 - y * y;
        s += b.w * p * p * p;
      }
    }
    return s;
  }
  double second_derivative(double x) const {
    double s = 0;
    for (auto& b : bumps_) {
      double y = (x - b.c) / b.r;
      if (std::fabs(y) < 1) s += b.w * (-6 + 36 * y * y - 30 * y * y * y * y) / (b.r * b.r);
    }
    return s;
  }
  // ghat(xi) = \int g(x) e^{-2 pi i x xi} dx, xi complex allowed
  cplx ft(cplx xi) const {
    cplx s = 0, om = kTwoPi * xi;
    for (auto& b : bumps_) s += b.w * b.r * std::exp(cplx(0, -1) * om * b.c) * detail::bump_integral(om * b.r);
    return s;
  }
  std::vector<double> breakpoints() const {
    std::vector<double> p;
    for (auto& b : bumps_) {
      p.push_back(b.c - b.r);
      p.push_back(b.c);
      p.push_back(b.c + b.r);
    }
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    return p;
  }
  double l1_second_derivative() const {
    if (empty()) return 0;
    return integrate_pts([&](double x) { return std::fabs(second_derivative(x)); }, breakpoints(), 1e-12, 1e-10, 40);
  }
  PairingFunction reflected() const {
    auto b = bumps_;
    for (auto& x : b) x.c = -x.c;
    return PairingFunction(b);
  }
  friend PairingFunction operator+(const PairingFunction& a, const PairingFunction& b) {
    auto v = a.bumps_;
    v.insert(v.end(), b.bumps_.begin(), b.bumps_.end());
    return PairingFunction(v);
  }

 private:
  std::vector<Bump> bumps_;
};

// "bump(c,r)" terms joined by '+', each optionally prefixed "w*"; "0" is the zero function
inline PairingFunction parse_pairing(const std::string& text) {
  std::size_t i = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::parse_error, "g: " + what + " at column " + std::to_string(i + 1));
  };
  auto ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  auto num = [&] {
    ws();
    double v;
    const char* b = text.data() + i;
    if (i < text.size() && text[i] == '+') ++b;
    auto [p, ec] = std::from_chars(b, text.data() + text.size(), v);
    if (ec != std::errc()) fail("expected a number");
    i = static_cast<std::size_t>(p - text.data());
    return v;
  };
  auto expect = [&](char ch) {
    ws();
    if (i >= text.size() || text[i] != ch) fail(std::string("expected '") + ch + "'");
    ++i;
  };
  ws();
  if (text.substr(i) == "0") return {};
  std::vector<Bump> out;
  while (true) {
    ws();
    double w = 1;
    if (i < text.size() && text[i] != 'b') {
      w = num();
      expect('*');
      ws();
    }
    if (text.compare(i, 4, "bump") != 0) fail("expected 'bump'");
    i += 4;
    expect('(');
    double c = num();
    expect(',');
    double r = num();
    expect(')');
    if (!(r > 0)) throw Error(ErrorKind::range_error, "g: bump radius must be > 0");
    out.push_back({c, r, w});
    ws();
    if (i == text.size()) break;
    expect('+');
  }
  return PairingFunction(out);
}

inline std::string to_literal(const PairingFunction& g) {
  if (g.empty()) return "0";
  std::string s;
  char buf[64];
  auto put = [&](double v) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    s.append(buf, p);
  };
  for (std::size_t k = 0; k < g.bumps().size(); ++k) {
    auto& b = g.bumps()[k];
    if (k) s += "+";
    if (b.w != 1) {
      put(b.w);
      s += "*";
    }
    s += "bump(";
    put(b.c);
    s += ",";
    put(b.r);
    s += ")";
  }
  return s;
}

struct ZeroSide {
  double value = 0;        // sum - archimedean
  double zero_sum = 0;
  double archimedean = 0;  // \int_{-V}^{V} ghat(xi/2pi) Omega(xi)/2pi d xi
  double tail_estimate = 0;
  std::int64_t zeros_used = 0;
  bool certified = false;
};

// sum over |gamma| < V of ghat(gamma/2pi) minus the archimedean integral.
// Off-axis entries contribute their pair gamma0 -+ i A/log(ref height).
inline ZeroSide zero_side(const PairingFunction& g, const ZeroTable& tab, double V) {
  if (!(V > 0)) throw Error(ErrorKind::range_error, "V: must be > 0");
  check_coverage(tab, 0, V, "zero_side");
  ZeroSide z;
  z.certified = tab.certified;
  if (g.empty()) return z;
  double lr = std::log(tab.reference_height());
  double s = 0, comp = 0;
  auto add = [&](double v) {
    double y = v - comp, t = s + y;
    comp = (t - s) - y;
    s = t;
  };
  for (std::size_t i = tab.lower(0); i < tab.size() && tab.ordinates[i] < V; ++i) {
    if (!(tab.ordinates[i] > 0)) continue;
    double g0 = tab.ordinates[i], a = tab.A(i) / lr;
    int m = tab.mult(i);
    double v;
    if (a == 0) {
      v = 2 * g.ft(g0 / kTwoPi).real();  // ghat(-x) = conj ghat(x) for real g
    } else {
      cplx p = g.ft(cplx(g0, -a) / kTwoPi) + g.ft(cplx(g0, a) / kTwoPi);
      cplx q = g.ft(cplx(-g0, -a) / kTwoPi) + g.ft(cplx(-g0, a) / kTwoPi);
      v = (p + q).real();
    }
    add(m * v);
    z.zeros_used += m;
  }
  z.zero_sum = s;
  // Omega is even, so the symmetric integral is 2 \int_0^V Re ghat Omega / 2pi
  double width = std::min(1.0, kPi / (4 * std::max(1.0, g.reach())));
  int panels = std::max(1, static_cast<int>(std::ceil(V / width)));
  z.archimedean = 2 * gl_panels([&](double xi) { return g.ft(xi / kTwoPi).real() * omega(xi) / kTwoPi; }, 0.0, V,
                                panels, 20);
  z.value = z.zero_sum - z.archimedean;
  // |ghat(gamma/2pi)| <= ||g''||_1 / gamma^2 against zero density log(t/2pi)/2pi, both sides and both pieces
  double C = g.l1_second_derivative(), lv = std::log(std::max(V, kTwoPi * 2.72) / kTwoPi);
  z.tail_estimate = 2 * (C / kPi) * (lv + 1) / V;
  return z;
}

// \int g_s(x) e^{x/2} dx - sum_n g_s(log n) Lambda(n)/sqrt n, g_s(x) = g(x) + g(-x)
inline double prime_side(const PairingFunction& g) {
  if (g.empty()) return 0;
  auto h = [&](double x) { return g(x) + g(-x); };
  std::vector<double> pts = g.breakpoints(), rp = g.reflected().breakpoints();
  pts.insert(pts.end(), rp.begin(), rp.end());
  pts.push_back(0);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double cont = integrate_pts([&](double x) { return h(x) * std::exp(0.5 * x); }, pts, 1e-14, 1e-14, 40);
  double top = g.reach(), s = 0;
  auto nmax = static_cast<std::uint64_t>(std::floor(std::exp(top)));
  for (std::uint64_t n = 2; n <= nmax; ++n) {
    double lam = von_mangoldt(n);
    if (lam != 0) s += h(std::log(double(n))) * lam / std::sqrt(double(n));
  }
  return cont - s;
}

// prime powers n whose log falls inside the symmetrised support
inline std::vector<std::uint64_t> prime_powers_in_support(const PairingFunction& g) {
  std::vector<std::uint64_t> out;
  if (g.empty()) return out;
  double top = g.reach();
  auto nmax = static_cast<std::uint64_t>(std::floor(std::exp(top)));
  for (std::uint64_t n = 2; n <= nmax; ++n)
    if (von_mangoldt(n) != 0 && std::log(double(n)) < top) out.push_back(n);
  return out;
}

struct ExplicitReport {
  double zero_side, prime_side, discrepancy, tail_estimate, error_budget, V;
  double support_lo, support_hi;
  bool certified;
};

inline ExplicitReport explicit_formula_discrepancy(const PairingFunction& g, const ZeroTable& tab, double V) {
  auto z = zero_side(g, tab, V);
  double p = prime_side(g);
  ExplicitReport r;
  r.zero_side = z.value;
  r.prime_side = p;
  r.discrepancy = std::fabs(z.value - p);
  r.tail_estimate = z.tail_estimate;
  // quadrature and root-location errors are far below the tail term
  r.error_budget = z.tail_estimate + 1e-10 * (1 + std::fabs(z.zero_sum));
  r.V = V;
  r.support_lo = g.lo();
  r.support_hi = g.hi();
  r.certified = z.certified;
  return r;
}

}  // namespace mesozeta
