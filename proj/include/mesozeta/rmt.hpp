#pragma once

// CUE bench: Haar unitaries, eigenphase linear statistics, Szego variance.
//
// Two samplers share one law. The QR route draws a complex Ginibre matrix,
// fixes the phases of R's diagonal and diagonalises. The CMV route draws
// Verblunsky coefficients (|a_k|^2 ~ Beta(1, N-k-1), a_{N-1} on the circle)
// and reads the eigenphases off the Pruefer phase, O(N^2) per sample.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "json.hpp"
#include "parallel.hpp"
#include "specialfn.hpp"
#include "stats.hpp"
#include "zeros.hpp"

namespace mesozeta {

enum class CueRoute { qr, cmv };

inline const char* route_name(CueRoute r) { return r == CueRoute::qr ? "qr" : "cmv"; }

struct UnitarySample {
  int N = 0;
  std::vector<double> phases;  // sorted, in [0, 2 pi)
  double unitarity_residual = 0;
  int retries = 0;
};

namespace detail {

struct Stream {
  std::uint64_t seed, ctr = 0;
  double uniform() { return unit_uniform(mix64(seed, ctr++)); }
  // Box-Muller, one value per call; the library distributions are not portable
  double normal() {
    double u = uniform(), v = uniform();
    return std::sqrt(-2 * std::log1p(-u)) * std::cos(kTwoPi * v);
  }
};

inline double wrap_phase(double x) {
  x = std::fmod(x, kTwoPi);
  if (x < 0) x += kTwoPi;
  if (x >= kTwoPi) x = 0;
  return x;
}

inline void check_dimension(int N) {
  if (N < 1 || N > 1024) throw Error(ErrorKind::range_error, "N: must lie in [1, 1024]");
}

// Pruefer phase psi(theta) of B_{N-1}(e^{i theta}) and its derivative:
// psi_0 = theta, psi_{k+1} = theta + psi_k - 2 arg(1 - a_k e^{i psi_k})
inline void pruefer(const std::vector<cplx>& a, double th, double& psi, double& dpsi) {
  psi = th;
  dpsi = 1;
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    cplx e = std::polar(1.0, psi), w = 1.0 - a[k] * e;
    // d/dtheta arg w = Im(w'/w), w' = -a e i psi'
    cplx dw = -a[k] * e * cplx(0, dpsi);
    double darg = (dw / w).imag();
    psi = th + psi - 2 * std::arg(w);
    dpsi = 1 + dpsi - 2 * darg;
  }
}

// phase only; e^{i psi} is carried along by conj(w)/w so each step needs one atan2
inline double pruefer_phase(const std::vector<cplx>& a, double th) {
  // real arithmetic throughout; std::complex multiply carries NaN/Inf recovery we do not need
  const double zr = std::cos(th), zi = std::sin(th);
  double er = zr, ei = zi, psi = th;
  for (std::size_t k = 0; k + 1 < a.size(); ++k) {
    double ar = a[k].real(), ai = a[k].imag();
    double wr = 1 - (ar * er - ai * ei), wi = -(ar * ei + ai * er);
    psi = th + psi - 2 * std::atan2(wi, wr);
    // e <- z e conj(w)^2 / |w|^2
    double n = wr * wr + wi * wi, cr = (wr * wr - wi * wi) / n, ci = -2 * wr * wi / n;
    double tr = zr * er - zi * ei, ti = zr * ei + zi * er;
    er = tr * cr - ti * ci;
    ei = tr * ci + ti * cr;
  }
  return psi;
}

}  // namespace detail

// Haar unitary via QR of a complex Ginibre matrix
inline Eigen::MatrixXcd haar_unitary(int N, std::uint64_t seed) {
  detail::check_dimension(N);
  detail::Stream rng{seed};
  Eigen::MatrixXcd Z(N, N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) Z(i, j) = cplx(rng.normal(), rng.normal()) / std::sqrt(2.0);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Z);
  Eigen::MatrixXcd Q = qr.householderQ();
  const auto& R = qr.matrixQR();
  for (int j = 0; j < N; ++j) {
    cplx d = R(j, j);
    double m = std::abs(d);
    Q.col(j) *= m > 0 ? d / m : cplx(1);
  }
  return Q;
}

inline UnitarySample sample_cue_qr(int N, std::uint64_t seed) {
  detail::check_dimension(N);
  UnitarySample s;
  s.N = N;
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::uint64_t sd = attempt == 0 ? seed : mix64(seed, 0x5eedULL + std::uint64_t(attempt));
    Eigen::MatrixXcd U = haar_unitary(N, sd);
    Eigen::MatrixXcd E = U.adjoint() * U - Eigen::MatrixXcd::Identity(N, N);
    s.unitarity_residual = E.cwiseAbs().maxCoeff();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(U, false);
    bool ok = es.info() == Eigen::Success && s.unitarity_residual <= 1e-10;
    if (ok) {
      s.phases.clear();
      for (int i = 0; i < N; ++i) {
        cplx l = es.eigenvalues()(i);
        if (std::fabs(std::abs(l) - 1) > 1e-9) {
          ok = false;
          break;
        }
        s.phases.push_back(detail::wrap_phase(std::arg(l)));
      }
    }
    if (ok) {
      std::sort(s.phases.begin(), s.phases.end());
      return s;
    }
    ++s.retries;
  }
  throw Error(ErrorKind::linalg_failure, "sample_cue: eigensolve failed after 8 seeds");
}

// Verblunsky coefficients of a CUE(N) CMV matrix
inline std::vector<cplx> cue_verblunsky(int N, std::uint64_t seed) {
  detail::check_dimension(N);
  detail::Stream rng{seed};
  std::vector<cplx> a(N);
  for (int k = 0; k + 1 < N; ++k) {
    double u = rng.uniform(), ph = rng.uniform();
    double r2 = -std::expm1(std::log1p(-u) / double(N - k - 1));  // 1 - (1-u)^{1/(N-k-1)}
    a[k] = std::polar(std::sqrt(r2), kTwoPi * ph);
  }
  a[N - 1] = std::polar(1.0, kTwoPi * rng.uniform());
  return a;
}

// eigenphases solve psi(theta) = arg conj(a_{N-1}) mod 2 pi; psi rises by 2 pi N over the circle
inline UnitarySample sample_cue_cmv(int N, std::uint64_t seed) {
  auto a = cue_verblunsky(N, seed);
  UnitarySample s;
  s.N = N;
  double eta = -std::arg(a[N - 1]);
  int G = N;
  std::vector<double> th(G + 1), ps(G + 1);
  for (int i = 0; i <= G; ++i) {
    th[i] = kTwoPi * i / G;
    ps[i] = detail::pruefer_phase(a, th[i]);
  }
  // targets eta + 2 pi j inside [psi(0), psi(2 pi))
  double j0 = std::ceil((ps[0] - eta) / kTwoPi);
  int cell = 0;
  for (int m = 0; m < N; ++m) {
    double y = eta + kTwoPi * (j0 + m);
    while (cell < G && ps[cell + 1] < y) ++cell;
    if (cell >= G) break;
    auto f = [&](double x) { return detail::pruefer_phase(a, x) - y; };
    double x = detail::brent_root(f, th[cell], th[cell + 1], ps[cell] - y, ps[cell + 1] - y, 1e-12);
    s.phases.push_back(detail::wrap_phase(x));
  }
  if (static_cast<int>(s.phases.size()) != N)
    throw Error(ErrorKind::linalg_failure, "sample_cue: Pruefer phase gave " + std::to_string(s.phases.size()) +
                                               " eigenphases for N = " + std::to_string(N));
  std::sort(s.phases.begin(), s.phases.end());
  return s;
}

inline UnitarySample sample_cue(int N, std::uint64_t seed, CueRoute route = CueRoute::qr) {
  return route == CueRoute::qr ? sample_cue_qr(N, seed) : sample_cue_cmv(N, seed);
}

// ---------------------------------------------------------------- circle functions

// sum of a constant, arc indicators 1_[a, a+len) and trigonometric terms
struct CircleFunction {
  struct Arc {
    double start, length, weight;
  };
  double constant = 0;
  std::vector<Arc> arcs;
  std::vector<std::pair<int, cplx>> coeffs;  // f_k e^{ik theta}

  static CircleFunction arc(double start, double length) {
    if (!(length > 0 && length <= kTwoPi)) throw Error(ErrorKind::range_error, "arc length must lie in (0, 2 pi]");
    CircleFunction f;
    f.arcs.push_back({start, length, 1});
    return f;
  }
  static CircleFunction cosine(int k, double amp = 1) {  // amp cos(k theta)
    CircleFunction f;
    f.coeffs.push_back({k, amp / 2});
    f.coeffs.push_back({-k, amp / 2});
    return f;
  }
  static CircleFunction constant_fn(double c) {
    CircleFunction f;
    f.constant = c;
    return f;
  }

  double operator()(double t) const {
    double v = constant;
    for (auto& a : arcs)
      if (detail::wrap_phase(t - a.start) < a.length) v += a.weight;
    for (auto& [k, c] : coeffs) v += (c * std::polar(1.0, k * t)).real();
    return v;
  }
  // (1/2pi) \int f e^{-ik theta}
  cplx coefficient(long long k) const {
    cplx v = k == 0 ? cplx(constant) : cplx(0);
    for (auto& a : arcs) {
      if (k == 0) v += a.weight * a.length / kTwoPi;
      else {
        double kk = double(k);
        v += a.weight * (std::polar(1.0, -kk * a.start) - std::polar(1.0, -kk * (a.start + a.length))) /
             cplx(0, kTwoPi * kk);
      }
    }
    for (auto& [j, c] : coeffs)
      if (j == k) v += c;
    return v;
  }
  long long max_mode() const {
    long long m = 0;
    for (auto& [k, c] : coeffs) m = std::max<long long>(m, std::llabs(k));
    return m;
  }
};

inline double cue_linear_statistic(const UnitarySample& s, const CircleFunction& f) {
  double v = 0;
  for (double t : s.phases) v += f(t);
  return v;
}

// sum_{1 <= |k| <= cutoff} |k| |f_k|^2
inline double szego_variance(const CircleFunction& f, long long cutoff) {
  if (cutoff < 1) throw Error(ErrorKind::range_error, "cutoff: must be >= 1");
  double s = 0;
  for (long long k = 1; k <= cutoff; ++k) s += double(k) * (std::norm(f.coefficient(k)) + std::norm(f.coefficient(-k)));
  return s;
}

// exact CUE(N) variance: sum_k min(|k|, N) |f_k|^2; arcs add a tail beyond kmax bounded by N/(pi^2 kmax)
inline double cue_exact_variance(const CircleFunction& f, int N, long long kmax = 1 << 20) {
  double s = 0;
  kmax = std::max<long long>(kmax, f.max_mode());
  for (long long k = 1; k <= kmax; ++k)
    s += double(std::min<long long>(k, N)) * (std::norm(f.coefficient(k)) + std::norm(f.coefficient(-k)));
  // sin^2 averages to 1/2 on the tail: sum_{k > kmax} 2 N w^2 (1/2) / (pi^2 k^2) per arc pair
  double w2 = 0;
  for (auto& a : f.arcs) w2 += a.weight * a.weight;
  return s + w2 * double(N) / (kPi * kPi * double(kmax));
}

struct CueReport {
  MomentReport report;
  int N;
  CueRoute route;
  nlohmann::ordered_json to_json() const {
    auto j = report.to_json();
    j["T"] = nullptr;
    j["n"] = nullptr;
    j["model"] = "cue";
    j["N"] = N;
    j["route"] = route_name(route);
    return j;
  }
};

// sum f(theta_j) for f made of arcs and a constant, straight from the Pruefer phase:
// the count in [s, e) is #{j : eta + 2 pi j in [psi(s), psi(e))}, psi(x + 2pi) = psi(x) + 2 pi N
inline double cmv_arc_statistic(const std::vector<cplx>& a, const CircleFunction& f) {
  int N = static_cast<int>(a.size());
  double eta = -std::arg(a[N - 1]), v = f.constant * N;
  for (auto& arc : f.arcs) {
    double c0 = std::ceil((detail::pruefer_phase(a, arc.start) - eta) / kTwoPi);
    double c1 = std::ceil((detail::pruefer_phase(a, arc.start + arc.length) - eta) / kTwoPi);
    v += arc.weight * (c1 - c0);
  }
  return v;
}

// Tr C for the CMV matrix: conj(a_0) - sum_{k>=1} conj(a_k) a_{k-1}
inline cplx cmv_trace(const std::vector<cplx>& a) {
  cplx t = std::conj(a[0]);
  for (std::size_t k = 1; k < a.size(); ++k) t -= std::conj(a[k]) * a[k - 1];
  return t;
}

// arcs, constants and first harmonics need no eigenphases on the CMV route
inline bool cmv_closed_form(const CircleFunction& f) {
  for (auto& [k, c] : f.coeffs)
    if (std::abs(k) > 1) return false;
  return true;
}

inline double cmv_statistic(const std::vector<cplx>& a, const CircleFunction& f) {
  double v = cmv_arc_statistic(a, f);
  if (!f.coeffs.empty()) {
    cplx t = cmv_trace(a);
    double N = double(a.size());
    for (auto& [k, c] : f.coeffs) v += (c * (k == 0 ? cplx(N) : k == 1 ? t : std::conj(t))).real();
  }
  return v;
}

// moments of sum f(theta_j) - N f_0, normalised by the Szego variance at cutoff N
inline CueReport cue_clt(int N, const CircleFunction& f, std::int64_t samples, std::uint64_t seed,
                         CueRoute route = CueRoute::qr, int jobs = 1) {
  detail::check_dimension(N);
  if (samples < 2) throw Error(ErrorKind::range_error, "samples: must be >= 2");
  double centre = double(N) * f.coefficient(0).real();
  std::vector<double> x(static_cast<std::size_t>(samples));
  bool closed = route == CueRoute::cmv && cmv_closed_form(f);
  parallel_for(x.size(), jobs, [&](std::size_t i) {
    std::uint64_t sd = mix64(seed, i);
    x[i] = (closed ? cmv_statistic(cue_verblunsky(N, sd), f)
                      : cue_linear_statistic(sample_cue(N, sd, route), f)) -
           centre;
  });
  double sv = szego_variance(f, N);
  CueReport r{moment_report(std::move(x), 0.0, sv > 0 ? sv : std::numeric_limits<double>::quiet_NaN()), N, route};
  r.report.predicted_mean = 0;
  r.report.predicted_variance = sv;
  return r;
}

// terms joined by '+': cos(k,amp) | arc(start,length) | const(c), each optionally "w*"
inline CircleFunction parse_circle_function(const std::string& text) {
  std::size_t i = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::parse_error, "f: " + what + " at column " + std::to_string(i + 1));
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
    if (ec != std::errc() || !std::isfinite(v)) fail("expected a number");
    i = static_cast<std::size_t>(p - text.data());
    return v;
  };
  auto expect = [&](char ch) {
    ws();
    if (i >= text.size() || text[i] != ch) fail(std::string("expected '") + ch + "'");
    ++i;
  };
  CircleFunction f;
  while (true) {
    ws();
    double w = 1;
    if (i < text.size() && !std::isalpha(static_cast<unsigned char>(text[i]))) {
      w = num();
      expect('*');
      ws();
    }
    std::size_t j = i;
    while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
    std::string name = text.substr(i, j - i);
    i = j;
    expect('(');
    if (name == "cos") {
      double k = num();
      expect(',');
      double amp = num();
      if (k != std::floor(k) || k < 1 || k > 1e6) throw Error(ErrorKind::range_error, "f: cos mode must be a positive integer");
      f.coeffs.push_back({int(k), w * amp / 2});
      f.coeffs.push_back({-int(k), w * amp / 2});
    } else if (name == "arc") {
      double s = num();
      expect(',');
      double len = num();
      if (!(len > 0 && len <= kTwoPi)) throw Error(ErrorKind::range_error, "f: arc length must lie in (0, 2 pi]");
      f.arcs.push_back({detail::wrap_phase(s), len, w});
    } else if (name == "const") {
      f.constant += w * num();
    } else {
      fail("unknown term '" + name + "'");
    }
    expect(')');
    ws();
    if (i == text.size()) break;
    expect('+');
  }
  return f;
}

}  // namespace mesozeta
