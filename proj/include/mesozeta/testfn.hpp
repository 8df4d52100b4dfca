#pragma once

// Test functions, the bump kernel and band-limited smoothing.

#include <fftw3.h>
#include <gsl/gsl_sf_expint.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"
#include "specialfn.hpp"

namespace mesozeta {

// ---------------------------------------------------------------- pieces

// value c0 + c1*(u - a) on [a, b)
struct Piece {
  double a, b, c0, c1;
  double at(double u) const { return c0 + c1 * (u - a); }
  double right_limit() const { return c0 + c1 * (b - a); }
};

namespace detail {

// \int_0^h v^p e^{-iwv} dv for p = 0, 1
inline void phi01(double w, double h, cplx& p0, cplx& p1) {
  double wh = w * h;
  if (std::fabs(wh) < 0.5) {
    // h^{p+1} sum_j (-i wh)^j / (j! (j+p+1))
    cplx term = 1.0, s0 = 0, s1 = 0;
    for (int j = 0; j < 24; ++j) {
      s0 += term / double(j + 1);
      s1 += term / double(j + 2);
      term *= cplx(0, -wh) / double(j + 1);
    }
    p0 = h * s0;
    p1 = h * h * s1;
    return;
  }
  cplx e = std::exp(cplx(0, -wh));
  cplx iw(0, w);
  p0 = (1.0 - e) / iw;
  p1 = -h * e / iw + p0 / iw;
}

}  // namespace detail

class TestFunction {
 public:
  TestFunction() = default;
  explicit TestFunction(std::vector<Piece> pieces) : p_(std::move(pieces)) {
    std::sort(p_.begin(), p_.end(), [](const Piece& x, const Piece& y) { return x.a < y.a; });
    for (size_t i = 0; i < p_.size(); ++i) {
      const Piece& q = p_[i];
      if (!std::isfinite(q.a) || !std::isfinite(q.b) || !std::isfinite(q.c0) || !std::isfinite(q.c1))
        throw Error(ErrorKind::range_error, "test function piece has non-finite entries");
      if (!(q.a < q.b)) throw Error(ErrorKind::range_error, "test function piece needs a < b");
      if (i > 0 && p_[i - 1].b > q.a) throw Error(ErrorKind::range_error, "test function pieces overlap");
    }
  }

  static TestFunction indicator(double a, double b) { return TestFunction({{a, b, 1.0, 0.0}}); }
  // tent of height 1 over [a, b], peak at the midpoint
  static TestFunction triangle(double a, double b) {
    if (!(a < b)) throw Error(ErrorKind::range_error, "triangle needs a < b");
    double m = 0.5 * (a + b), s = 1.0 / (m - a);
    return TestFunction({{a, m, 0.0, s}, {m, b, 1.0, -s}});
  }

  const std::vector<Piece>& pieces() const { return p_; }
  bool empty() const { return p_.empty(); }
  double lo() const { return p_.empty() ? 0 : p_.front().a; }
  double hi() const { return p_.empty() ? 0 : p_.back().b; }

  double operator()(double u) const {
    auto it = std::upper_bound(p_.begin(), p_.end(), u, [](double x, const Piece& q) { return x < q.a; });
    if (it == p_.begin()) return 0;
    --it;
    return u < it->b ? it->at(u) : 0.0;
  }

  double integral() const {
    double s = 0;
    for (auto& q : p_) s += (q.b - q.a) * (q.c0 + 0.5 * q.c1 * (q.b - q.a));
    return s;
  }

  // jumps (including at the ends of the support) plus slope variation
  double total_variation() const {
    double v = 0, prev = 0, prev_b = -std::numeric_limits<double>::infinity();
    for (auto& q : p_) {
      if (q.a > prev_b) v += std::fabs(prev);  // drop to zero in a gap
      if (q.a > prev_b) prev = 0;
      v += std::fabs(q.c0 - prev) + std::fabs(q.c1) * (q.b - q.a);
      prev = q.right_limit();
      prev_b = q.b;
    }
    return v + std::fabs(prev);
  }

  // \int eta(u) e(-u x) du, closed form
  cplx ft(double x) const {
    double w = kTwoPi * x;
    cplx s = 0;
    for (auto& q : p_) {
      cplx p0, p1;
      detail::phi01(w, q.b - q.a, p0, p1);
      s += std::exp(cplx(0, -w * q.a)) * (q.c0 * p0 + q.c1 * p1);
    }
    return s;
  }

  // eta(s * u): pieces rescaled
  TestFunction dilate(double s) const {
    std::vector<Piece> out;
    for (auto& q : p_) out.push_back({q.a / s, q.b / s, q.c0, q.c1 * s});
    return TestFunction(out);
  }
  TestFunction shift(double c) const {  // eta(u - c)
    std::vector<Piece> out;
    for (auto& q : p_) out.push_back({q.a + c, q.b + c, q.c0, q.c1});
    return TestFunction(out);
  }
  TestFunction scale(double s) const {
    std::vector<Piece> out;
    for (auto& q : p_) out.push_back({q.a, q.b, q.c0 * s, q.c1 * s});
    return TestFunction(out);
  }

  std::vector<double> breakpoints() const {
    std::vector<double> v;
    for (auto& q : p_) {
      v.push_back(q.a);
      v.push_back(q.b);
    }
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }

 private:
  std::vector<Piece> p_;
};

// eta1 + eta2 with exact piece merging
inline TestFunction add(const TestFunction& f, const TestFunction& g, double a = 1, double b = 1) {
  std::vector<double> br = f.breakpoints();
  for (double x : g.breakpoints()) br.push_back(x);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  auto coeffs = [](const TestFunction& h, double lo, double hi, double& c0, double& c1) {
    c0 = 0, c1 = 0;
    double m = 0.5 * (lo + hi);
    for (auto& q : h.pieces())
      if (q.a <= m && m < q.b) {
        c0 = q.at(lo);
        c1 = q.c1;
      }
  };
  std::vector<Piece> out;
  for (size_t i = 0; i + 1 < br.size(); ++i) {
    double f0, f1, g0, g1;
    coeffs(f, br[i], br[i + 1], f0, f1);
    coeffs(g, br[i], br[i + 1], g0, g1);
    double c0 = a * f0 + b * g0, c1 = a * f1 + b * g1;
    if (c0 != 0 || c1 != 0) out.push_back({br[i], br[i + 1], c0, c1});
  }
  return TestFunction(out);
}

// ---------------------------------------------------------------- literal syntax
//   indicator(a,b) | triangle(a,b) | piecewise[(a,b,c0,c1),...]

namespace detail {

struct LitParser {
  const std::string& s;
  size_t i = 0;
  void ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::parse_error, "test function '" + s + "': " + what + " at column " + std::to_string(i + 1));
  }
  void expect(char c) {
    ws();
    if (i >= s.size() || s[i] != c) fail(std::string("expected '") + c + "'");
    ++i;
  }
  bool peek(char c) {
    ws();
    return i < s.size() && s[i] == c;
  }
  double num() {
    ws();
    size_t j = i;
    while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '.' || s[j] == '-' ||
                            s[j] == '+'))
      ++j;
    double v;
    auto r = std::from_chars(s.data() + i, s.data() + j, v);
    if (r.ec != std::errc() || r.ptr != s.data() + j) fail("expected a number");
    if (!std::isfinite(v)) fail("non-finite number");
    i = j;
    return v;
  }
  std::string word() {
    ws();
    size_t j = i;
    while (j < s.size() && std::isalpha(static_cast<unsigned char>(s[j]))) ++j;
    std::string w = s.substr(i, j - i);
    i = j;
    return w;
  }
};

}  // namespace detail

inline TestFunction parse_test_function(const std::string& text) {
  detail::LitParser p{text};
  std::string w = p.word();
  TestFunction out;
  if (w == "indicator" || w == "triangle") {
    p.expect('(');
    double a = p.num();
    p.expect(',');
    double b = p.num();
    p.expect(')');
    if (!(a < b)) throw Error(ErrorKind::range_error, "test function '" + text + "': needs a < b");
    out = w == "indicator" ? TestFunction::indicator(a, b) : TestFunction::triangle(a, b);
  } else if (w == "piecewise") {
    p.expect('[');
    std::vector<Piece> v;
    do {
      p.expect('(');
      Piece q;
      q.a = p.num();
      p.expect(',');
      q.b = p.num();
      p.expect(',');
      q.c0 = p.num();
      p.expect(',');
      q.c1 = p.num();
      p.expect(')');
      v.push_back(q);
      if (!p.peek(',')) break;
      p.expect(',');
    } while (true);
    p.expect(']');
    out = TestFunction(v);
  } else {
    p.fail("unknown test function '" + w + "'");
  }
  p.ws();
  if (p.i != text.size()) p.fail("trailing characters");
  return out;
}

// canonical literal; parse(to_literal(f)) == f
inline std::string to_literal(const TestFunction& f) {
  auto num = [](double x) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
  };
  std::string s = "piecewise[";
  for (size_t i = 0; i < f.pieces().size(); ++i) {
    auto& q = f.pieces()[i];
    if (i) s += ",";
    s += "(" + num(q.a) + "," + num(q.b) + "," + num(q.c0) + "," + num(q.c1) + ")";
  }
  return s + "]";
}

// ---------------------------------------------------------------- bump kernel

// 1 on the plateau, quintic smoothstep taper (C^2) to 0 at +-kappa
struct BumpKernel {
  int order_k = 1;
  explicit BumpKernel(int k = 1) : order_k(k) {
    if (k < 1) throw Error(ErrorKind::range_error, "kernel order must be >= 1");
  }
  double kappa() const { return 1.0 / (8.0 * order_k); }
  double plateau() const { return 1.0 / (16.0 * order_k); }
  double operator()(double xi) const {
    double a = std::fabs(xi), p = plateau(), k = kappa();
    if (a <= p) return 1;
    if (a >= k) return 0;
    double s = (a - p) / (k - p);
    return 1 - s * s * s * (10 - 15 * s + 6 * s * s);
  }
};

// ---------------------------------------------------------------- Fejer square

// a * (sin(pi a x)/(pi a x))^2, transform max(0, 1 - |xi|/a); mass 1
struct FejerSquare {
  double a = 1;
  double operator()(double x) const {
    double y = kPi * a * x;
    if (std::fabs(y) < 1e-4) return a * (1 - y * y / 3);
    double s = std::sin(y) / y;
    return a * s * s;
  }
  cplx ft(double xi) const { return std::max(0.0, 1 - std::fabs(xi) / a); }
};

// ---------------------------------------------------------------- smoothing

// \int K(xi/L) f^(xi) e(z xi) d xi over (-kappa L, kappa L)
template <class Fn>
cplx bandlimited_convolve(const BumpKernel& K, double L, const Fn& eta, cplx z, double abs_tol = 1e-13) {
  if (!(L > 0)) throw Error(ErrorKind::range_error, "L must be positive");
  double p = K.plateau() * L, k = K.kappa() * L;
  // pair +-xi so that real z and real eta give a real result
  auto f = [&](double xi) {
    cplx e = std::exp(cplx(0, kTwoPi * xi) * z);
    cplx em = std::exp(cplx(0, -kTwoPi * xi) * z);
    return K(xi / L) * (eta.ft(xi) * e + eta.ft(-xi) * em);
  };
  double scale = std::exp(kTwoPi * std::fabs(z.imag()) * k);
  cplx s = 0;
  // split into panels so oscillation at large |z| is resolved
  int panels = 1 + static_cast<int>(std::ceil(std::abs(z) * k * 0.25));
  std::vector<double> pts{0};
  for (int i = 1; i <= panels; ++i) pts.push_back(p * i / panels);
  for (int i = 1; i <= panels; ++i) pts.push_back(p + (k - p) * i / panels);
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    s += integrate(f, pts[i], pts[i + 1], abs_tol * scale / double(pts.size()), 1e-13, 30);
  return s;
}

// Fast real-line tabulation of x -> (K_L * eta)(x).
// Trapezoid sums of the compactly supported transform are exact up to the
// aliasing sum over x + k P, and the profile decays like |x|^-4, so a long
// period P makes the FFT output exact to rounding; 6-point Lagrange fills in.
class SmoothedProfile {
 public:
  template <class Fn>
  SmoothedProfile(const BumpKernel& K, double L, const Fn& eta, int log2_size = 18) {
    if (!(L > 0)) throw Error(ErrorKind::range_error, "L must be positive");
    double B = K.kappa() * L;
    h_ = std::exp2(-std::ceil(std::log2(B / 0.01)));
    const std::size_t M = std::size_t(1) << log2_size;
    double P = h_ * double(M), dxi = 1.0 / P;
    std::vector<double> out(M);
    {
      fftw_complex* in = fftw_alloc_complex(M / 2 + 1);
      std::vector<cplx> g(M / 2 + 1, 0.0);
      for (std::size_t m = 0; m <= M / 2; ++m) {
        double xi = double(m) * dxi;
        if (xi >= B) break;
        g[m] = K(xi / L) * eta.ft(xi) * dxi;
      }
      for (std::size_t m = 0; m <= M / 2; ++m) {
        in[m][0] = g[m].real();
        in[m][1] = g[m].imag();
      }
      fftw_plan plan;
      {
        std::lock_guard<std::mutex> lk(planner_mutex());
        plan = fftw_plan_dft_c2r_1d(static_cast<int>(M), in, out.data(), FFTW_ESTIMATE);
      }
      fftw_execute(plan);
      {
        std::lock_guard<std::mutex> lk(planner_mutex());
        fftw_destroy_plan(plan);
      }
      fftw_free(in);
    }
    // keep |x| <= P/4, stored from -P/4
    half_ = M / 4;
    v_.resize(2 * half_ + 1);
    for (std::size_t j = 0; j <= 2 * half_; ++j) {
      long long idx = static_cast<long long>(j) - static_cast<long long>(half_);
      v_[j] = out[static_cast<std::size_t>((idx + static_cast<long long>(M)) % static_cast<long long>(M))];
    }
    double peak = 0;
    for (double x : v_) peak = std::max(peak, std::fabs(x));
    peak_ = peak;
    // reach: beyond it every tabulated value is below 1e-15 of the peak
    std::size_t r = 0;
    for (std::size_t j = 0; j <= 2 * half_; ++j)
      if (std::fabs(v_[j]) > 1e-15 * peak) r = std::max<std::size_t>(r, j > half_ ? j - half_ : half_ - j);
    reach_ = std::min(double(r + 3) * h_, (double(half_) - 4) * h_);
  }

  double operator()(double x) const {
    if (!(std::fabs(x) <= reach_)) return 0;
    double u = x / h_ + double(half_);
    long long j = static_cast<long long>(std::floor(u));
    double f = u - double(j);
    // 6-point Lagrange on j-2..j+3
    static constexpr int lo = -2;
    double s = 0;
    for (int a = 0; a < 6; ++a) {
      double w = 1;
      for (int b = 0; b < 6; ++b)
        if (b != a) w *= (f - (lo + b)) / double(a - b);
      s += w * v_[static_cast<std::size_t>(j + lo + a)];
    }
    return s;
  }
  double reach() const { return reach_; }
  double step() const { return h_; }
  double peak() const { return peak_; }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  double h_ = 0, reach_ = 0, peak_ = 0;
  std::size_t half_ = 0;
  std::vector<double> v_;
};

// ---------------------------------------------------------------- envelopes

// step function on unit cells [l, l+1) holding sup |eta| over [k l, k(l+1))
inline TestFunction envelope_M(double k, const TestFunction& eta) {
  if (!(k > 0)) throw Error(ErrorKind::range_error, "envelope scale k must be positive");
  if (eta.empty()) return {};
  long long l0 = static_cast<long long>(std::floor(eta.lo() / k)), l1 = static_cast<long long>(std::ceil(eta.hi() / k));
  std::vector<Piece> out;
  for (long long l = l0; l < l1; ++l) {
    double a = k * double(l), b = k * double(l + 1), sup = 0;
    for (auto& q : eta.pieces()) {
      double lo = std::max(a, q.a), hi = std::min(b, q.b);
      if (lo >= hi) continue;
      // linear on the overlap: sup of |.| at the ends (right end as a limit)
      sup = std::max({sup, std::fabs(q.at(lo)), std::fabs(q.at(hi))});
    }
    if (sup > 0) out.push_back({double(l), double(l + 1), sup, 0.0});
  }
  return TestFunction(out);
}

inline double l1_norm(const TestFunction& f) {
  double s = 0;
  for (auto& q : f.pieces()) {
    double va = q.c0, vb = q.right_limit(), w = q.b - q.a;
    if (va * vb >= 0) {
      s += 0.5 * w * (std::fabs(va) + std::fabs(vb));
    } else {
      double z = w * std::fabs(va) / (std::fabs(va) + std::fabs(vb));
      s += 0.5 * (z * std::fabs(va) + (w - z) * std::fabs(vb));
    }
  }
  return s;
}

// sum over |l| > sqrt(T) of log(|l|+2) sup_{[l,l+1)} |eta|
inline double tail_eps(double T, const TestFunction& eta) {
  if (!(T >= 2)) throw Error(ErrorKind::range_error, "tail_eps needs T >= 2");
  double r = std::sqrt(T), s = 0;
  for (auto& c : envelope_M(1.0, eta).pieces()) {
    long long l = static_cast<long long>(c.a);
    if (std::fabs(double(l)) > r) s += std::log(std::fabs(double(l)) + 2) * c.c0;
  }
  return s;
}

// same for a function given by its cell supremum, summed over |l| <= lmax
inline double tail_eps(double T, const std::function<double(long long)>& cell_sup, long long lmax) {
  if (!(T >= 2)) throw Error(ErrorKind::range_error, "tail_eps needs T >= 2");
  double r = std::sqrt(T), s = 0;
  long long start = static_cast<long long>(std::floor(r)) + 1;
  for (long long l = start; l <= lmax; ++l) s += std::log(double(l) + 2) * (cell_sup(l) + cell_sup(-l));
  return s;
}

// Cauchy dilate Q(u/H)/H; sup over [l, l+1) sits at the end nearest 0
struct CauchyDilate {
  double H = 1;
  double operator()(double u) const { return 1.0 / (kPi * H * (1 + (u / H) * (u / H))); }
  double cell_sup(long long l) const {
    return (*this)(l >= 0 ? double(l) : double(l + 1));
  }
  // bound on the part of tail_eps beyond |l| = lmax
  double truncation_bound(long long lmax) const {
    double x = double(lmax);
    return 2 * H / kPi * (std::log(x + 2) + 1) / x;
  }
};

// ---------------------------------------------------------------- Q kernel and weights

inline double q_kernel(double x) { return 1.0 / (kPi * (1 + x * x)); }

enum class WeightKind { fejer, fejer_indicator, cauchy, uniform };

// Nonnegative weight sigma with sup (1+x^2) sigma finite.
struct SmoothingWeight {
  WeightKind kind = WeightKind::fejer;
  double center = 0, width = 1;  // fejer: (1/w) S((x-c)/w); fejer_indicator: 1_[1,2] * S_w; cauchy: Q((x-c)/w)/w
  double scale = 1;              // overall multiple

  static SmoothingWeight fejer(double c = 0, double w = 1) { return {WeightKind::fejer, c, w, 1}; }
  static SmoothingWeight fejer_indicator(double eps) { return {WeightKind::fejer_indicator, 1.5, eps, 1}; }
  static SmoothingWeight cauchy(double c = 0, double w = 1) { return {WeightKind::cauchy, c, w, 1}; }
  static SmoothingWeight uniform() { return {WeightKind::uniform, 1.5, 1, 1}; }

  double operator()(double x) const {
    switch (kind) {
      case WeightKind::fejer: {
        return scale * FejerSquare{1.0}((x - center) / width) / width;
      }
      case WeightKind::fejer_indicator: {
        // \int_1^2 S_w(x-u) du = G((x-1)/w) - G((x-2)/w), G' = S
        auto G = [](double y) {
          if (std::fabs(y) < 1e-6) return 0.5 + y;
          double s = std::sin(kPi * y);
          return 0.5 - s * s / (kPi * kPi * y) + gsl_sf_Si(kTwoPi * y) / kPi;
        };
        return scale * std::max(0.0, G((x - 1) / width) - G((x - 2) / width));
      }
      case WeightKind::cauchy:
        return scale * q_kernel((x - center) / width) / width;
      case WeightKind::uniform:
        return (x >= 1 && x < 2) ? scale : 0.0;
    }
    return 0;
  }
  double mass() const { return scale; }
  // half-width of the Fourier support (infinite for cauchy/uniform)
  double transform_support() const {
    switch (kind) {
      case WeightKind::fejer:
      case WeightKind::fejer_indicator:
        return 1.0 / width;
      default:
        return std::numeric_limits<double>::infinity();
    }
  }
  std::string name() const {
    switch (kind) {
      case WeightKind::fejer: return "fejer";
      case WeightKind::fejer_indicator: return "fejer_indicator";
      case WeightKind::cauchy: return "cauchy";
      case WeightKind::uniform: return "uniform";
    }
    return "?";
  }
};

// pi * sup (1+x^2)|sigma(x)|: dense grid then golden-section polish
inline double q_norm(const SmoothingWeight& s) {
  if (s.kind == WeightKind::cauchy) {
    // (1+x^2)/(w(1+((x-c)/w)^2)) is a ratio of quadratics; sup on a grid is plenty, but use the exact form
    // max over x of (1+x^2)/(w^2+(x-c)^2) * w
    double c = s.center, w = s.width;
    // stationary points solve c x^2 - (w^2 + c^2 - 1) x - c = 0
    std::vector<double> xs{0.0};
    if (c == 0) {
      xs.push_back(1e9);
    } else {
      double A = c, B = -(w * w + c * c - 1), C = -c, d = std::sqrt(B * B - 4 * A * C);
      xs.push_back((-B + d) / (2 * A));
      xs.push_back((-B - d) / (2 * A));
    }
    double best = 0;
    for (double x : xs) best = std::max(best, (1 + x * x) * w / (w * w + (x - c) * (x - c)));
    best = std::max(best, w);  // |x| -> infinity
    return s.scale * best;
  }
  if (s.kind == WeightKind::uniform) return kPi * s.scale * 5.0;  // sup at x -> 2
  auto g = [&](double x) { return (1 + x * x) * s(x); };
  double lo = s.center - 200 * s.width - 3, hi = s.center + 200 * s.width + 3;
  int n = 400000;
  double best = 0, bx = 0;
  for (int i = 0; i <= n; ++i) {
    double x = lo + (hi - lo) * i / n, v = g(x);
    if (v > best) best = v, bx = x;
  }
  double a = bx - (hi - lo) / n, b = bx + (hi - lo) / n;
  const double r = 0.5 * (std::sqrt(5.0) - 1);
  for (int it = 0; it < 80; ++it) {
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    if (g(x1) > g(x2)) b = x2;
    else a = x1;
  }
  best = std::max(best, g(0.5 * (a + b)));
  // beyond the grid (1+x^2) sigma tends to scale*w/pi^2 (fejer) from below
  return kPi * best;
}

// ---------------------------------------------------------------- smoothing bound checks

// max over the grid of |F(x+ie)+F(x-ie)-2F(x)| / (e/(1+x^2) (1+eL) e^{2 pi kappa e L})
template <class Fn>
double check_pointwise_bound(const BumpKernel& K, const Fn& eta, double L, double eps, const std::vector<double>& xs) {
  if (!(eps >= 0)) throw Error(ErrorKind::range_error, "eps must be >= 0");
  if (eps == 0) return 0;
  double worst = 0;
  for (double x : xs) {
    cplx a = bandlimited_convolve(K, L, eta, cplx(x, eps));
    cplx b = bandlimited_convolve(K, L, eta, cplx(x, -eps));
    cplx c = bandlimited_convolve(K, L, eta, cplx(x, 0));
    double lhs = std::abs(a + b - 2.0 * c);
    double rhs = eps / (1 + x * x) * (1 + eps * L) * std::exp(kTwoPi * K.kappa() * eps * L);
    worst = std::max(worst, lhs / rhs);
  }
  return worst;
}

enum class TruncationNorm { plain, log_weighted, envelope };

// ||f - K_L * f|| in L^1(dy), L^1(log(|y|+2) dy), or ||M_{1/L}(f - K_L*f)||_1
inline double l1_truncation_error(const BumpKernel& K, double L, const TestFunction& f, TruncationNorm mode) {
  SmoothedProfile prof(K, L, f);
  auto g = [&](double y) { return f(y) - prof(y); };
  double R = prof.reach();
  std::vector<double> pts;
  // panels of width ~1/L near the support, geometric further out
  double lo = f.lo(), hi = f.hi();
  for (double x : f.breakpoints()) pts.push_back(x);
  double w = 1.0 / L;
  for (double d = w; d < R; d *= 1.5) {
    pts.push_back(lo - d);
    pts.push_back(hi + d);
  }
  pts.push_back(lo - R);
  pts.push_back(hi + R);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (mode == TruncationNorm::envelope) {
    // sup of |g| on each cell [l/L, (l+1)/L): dense sampling plus one-sided limits at jumps
    double s = 0;
    long long l0 = static_cast<long long>(std::floor((lo - R) * L)), l1 = static_cast<long long>(std::ceil((hi + R) * L));
    auto bps = f.breakpoints();
    for (long long l = l0; l < l1; ++l) {
      double a = double(l) / L, b = double(l + 1) / L, sup = 0;
      const int n = 64;
      for (int i = 0; i <= n; ++i) {
        double y = a + (b - a) * i / n;
        if (i == n) y = std::nextafter(b, a);
        sup = std::max(sup, std::fabs(g(y)));
      }
      for (double x : bps)
        if (x > a && x < b) sup = std::max(sup, std::fabs(g(std::nextafter(x, a))));
      s += sup;
    }
    return s;
  }
  auto integrand = [&](double y) {
    double v = std::fabs(g(y));
    return mode == TruncationNorm::log_weighted ? v * std::log(std::fabs(y) + 2) : v;
  };
  return integrate_pts(integrand, pts, 1e-10, 1e-9, 40);
}

// uniform | fejer(c,w) | fejer_indicator(eps) | cauchy(c,w), optionally "s*" in front
inline SmoothingWeight parse_smoothing_weight(const std::string& text) {
  detail::LitParser p{text};
  double scale = 1;
  p.ws();
  if (p.i < text.size() && !std::isalpha(static_cast<unsigned char>(text[p.i]))) {
    std::size_t star = text.find('*');
    if (star == std::string::npos) p.fail("expected a weight name");
    std::string head = text.substr(0, star);
    detail::LitParser q{head};
    scale = q.num();
    q.ws();
    if (q.i != head.size()) q.fail("bad scale");
    p.i = star + 1;
  }
  std::string w = p.word();
  if (w == "fejer_" || w == "fejer") {
    // word() stops at '_'
    if (p.i < text.size() && text[p.i] == '_') {
      ++p.i;
      if (p.word() != "indicator") p.fail("unknown weight");
      w = "fejer_indicator";
    }
  }
  SmoothingWeight out;
  if (w == "uniform") {
    out = SmoothingWeight::uniform();
  } else if (w == "fejer" || w == "cauchy") {
    p.expect('(');
    double c = p.num();
    p.expect(',');
    double width = p.num();
    p.expect(')');
    if (!(width > 0)) throw Error(ErrorKind::range_error, "weight '" + text + "': width must be > 0");
    out = w == "fejer" ? SmoothingWeight::fejer(c, width) : SmoothingWeight::cauchy(c, width);
  } else if (w == "fejer_indicator") {
    p.expect('(');
    double eps = p.num();
    p.expect(')');
    if (!(eps > 0)) throw Error(ErrorKind::range_error, "weight '" + text + "': eps must be > 0");
    out = SmoothingWeight::fejer_indicator(eps);
  } else {
    p.fail("unknown weight '" + w + "'");
  }
  p.ws();
  if (p.i != text.size()) p.fail("trailing characters");
  if (!(scale > 0)) throw Error(ErrorKind::range_error, "weight '" + text + "': scale must be > 0");
  out.scale = scale;
  return out;
}

inline std::string to_literal(const SmoothingWeight& s) {
  auto num = [](double x) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
  };
  std::string b;
  switch (s.kind) {
    case WeightKind::uniform: b = "uniform"; break;
    case WeightKind::fejer: b = "fejer(" + num(s.center) + "," + num(s.width) + ")"; break;
    case WeightKind::cauchy: b = "cauchy(" + num(s.center) + "," + num(s.width) + ")"; break;
    case WeightKind::fejer_indicator: b = "fejer_indicator(" + num(s.width) + ")"; break;
  }
  return s.scale == 1 ? b : num(s.scale) + "*" + b;
}

}  // namespace mesozeta
