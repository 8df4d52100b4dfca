#pragma once

// Off-axis counting, windowed L^k zero-density sums, Fujii moments and a
// synthetic off-axis ensemble to run them on.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "specialfn.hpp"
#include "stats.hpp"
#include "testfn.hpp"
#include "zeros.hpp"

namespace mesozeta {

struct DensityReport {
  double lhs = 0;
  double rhs_bound = 0;  // the rhs shape (no implied constant)
  double fitted_constant = 0;
  nlohmann::ordered_json parameters;
};

// ---------------------------------------------------------------- counting

// off-axis threshold: beta > sigma  <=>  A > (sigma - 1/2) log(ref height)
inline double offaxis_threshold(const ZeroTable& tab, double sigma_level) {
  return (sigma_level - 0.5) * std::log(tab.reference_height());
}

// strict; an A that equals the threshold up to rounding in sigma is not beyond it
inline bool beyond(double A, double thr) { return thr == 0 ? A > 0 : A > thr * (1 + 1e-12); }

inline std::int64_t count_off_axis(const ZeroTable& tab, double sigma_level, double T) {
  if (!(sigma_level >= 0.5 && sigma_level < 1)) throw Error(ErrorKind::range_error, "sigma_level: must lie in [1/2, 1)");
  check_coverage(tab, T, T, "count_off_axis");
  double thr = offaxis_threshold(tab, sigma_level);
  std::int64_t c = 0;
  for (std::size_t i = 0; i < tab.size() && tab.ordinates[i] < T; ++i)
    if (tab.ordinates[i] > 0 && beyond(tab.A(i), thr)) c += tab.mult(i);
  return c;
}

// ---------------------------------------------------------------- event sweeps

// (1/T) \int_0^T D(t)^k dt with D(t) = #{gamma in S : t <= gamma < t + h}
// where S = zeros with beta > sigma. D changes at gamma - h (+1) and gamma (-1).
inline double window_power_mean(const std::vector<double>& g, double h, double T, int k) {
  std::vector<std::pair<double, int>> ev;
  ev.reserve(2 * g.size());
  for (double x : g) {
    ev.push_back({x - h, +1});
    ev.push_back({x, -1});
  }
  std::sort(ev.begin(), ev.end());
  double acc = 0, prev = 0;
  long long D = 0;
  for (auto& [x, d] : ev) {
    double xc = std::clamp(x, 0.0, T);
    if (xc > prev && D != 0) acc += std::pow(double(D), k) * (xc - prev);
    prev = std::max(prev, xc);
    D += d;
  }
  return acc / T;
}

inline std::vector<double> offaxis_ordinates(const ZeroTable& tab, double sigma_level, double hi) {
  double thr = offaxis_threshold(tab, sigma_level);
  std::vector<double> g;
  for (std::size_t i = 0; i < tab.size() && tab.ordinates[i] < hi; ++i)
    if (tab.ordinates[i] > 0 && beyond(tab.A(i), thr))
      for (int m = 0; m < tab.mult(i); ++m) g.push_back(tab.ordinates[i]);
  return g;
}

// (1/T) \int_0^T |N(sigma, t + H/log T) - N(sigma, t)|^k dt against H^k T^{-c(sigma-1/2)}
inline DensityReport windowed_Lk(const ZeroTable& tab, double sigma_level, double H, int k, double T, double c = 0.5) {
  // sigma >= 1 is allowed: synthetic ensembles are not confined to the strip
  if (!(sigma_level >= 0.5 && std::isfinite(sigma_level)))
    throw Error(ErrorKind::range_error, "sigma_level: must be >= 1/2");
  if (!(H >= 1 && H <= std::pow(T, 0.25))) throw Error(ErrorKind::range_error, "H: must lie in [1, T^(1/4)]");
  if (k < 1) throw Error(ErrorKind::range_error, "k: must be >= 1");
  double h = H / std::log(T);
  check_coverage(tab, 0, T + h, "windowed_Lk");
  auto g = offaxis_ordinates(tab, sigma_level, T + h);
  DensityReport r;
  r.lhs = window_power_mean(g, h, T, k);
  r.rhs_bound = std::pow(H, k) * std::pow(T, -c * (sigma_level - 0.5));
  r.fitted_constant = r.lhs / r.rhs_bound;
  r.parameters = {{"sigma_level", sigma_level}, {"H", H}, {"k", k}, {"c", c}, {"T", T}};
  return r;
}

// ---------------------------------------------------------------- step functions on [0, inf)

// value v[i] on [x[i], x[i+1]), the last value continuing to infinity
struct StepFn {
  std::vector<double> x, v;
  static StepFn indicator_above(double a) { return {{0.0, a}, {0.0, 1.0}}; }
  static StepFn zero() { return {{0.0}, {0.0}}; }
  double operator()(double u) const {
    auto it = std::upper_bound(x.begin(), x.end(), u);
    if (it == x.begin()) return 0;
    return v[static_cast<std::size_t>(it - x.begin()) - 1];
  }
  // \int_0^inf f^p e^{-c xi} d xi, closed form
  double exp_moment(double p, double c) const {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double a = x[i], b = i + 1 < x.size() ? x[i + 1] : INFINITY;
      double w = std::exp(-c * a) - (std::isinf(b) ? 0.0 : std::exp(-c * b));
      if (v[i] != 0) s += std::pow(std::fabs(v[i]), p) * w / c;
    }
    return s;
  }
  void validate() const {
    if (x.empty() || x.size() != v.size() || x.front() != 0)
      throw Error(ErrorKind::range_error, "f: step function must start at 0 with one value per knot");
    for (std::size_t i = 1; i < x.size(); ++i)
      if (!(x[i] > x[i - 1])) throw Error(ErrorKind::range_error, "f: knots must increase");
    for (double y : v)
      if (!(y >= 0)) throw Error(ErrorKind::range_error, "f: must be nonnegative");
  }
};

// \int sigma(t/T)/T |sum_gamma f(|A|) Q((log T / 2 pi H)(gamma - t))|^k dt
inline DensityReport q_smoothed_Lk(const ZeroTable& tab, const StepFn& f, double H, int k, double T,
                                   const SmoothingWeight& sigma, double c = 0.5, int jobs = 1) {
  f.validate();
  if (!(H >= 1 && H <= std::pow(T, 0.25))) throw Error(ErrorKind::range_error, "H: must lie in [1, T^(1/4)]");
  if (k < 1) throw Error(ErrorKind::range_error, "k: must be >= 1");
  double s = std::log(T) / (kTwoPi * H);
  // contributing zeros, both signs
  std::vector<double> g, w;
  for (std::size_t i = 0; i < tab.size(); ++i) {
    double fv = f(std::fabs(tab.A(i)));
    if (fv == 0) continue;
    g.push_back(tab.ordinates[i]);
    w.push_back(fv * tab.mult(i));
  }
  double x_lo, x_hi;
  weight_support(sigma, x_lo, x_hi);
  x_lo = std::max(x_lo, tab.t_min / T);
  x_hi = std::min(x_hi, tab.t_max / T);
  DensityReport r;
  double q = q_norm(sigma);
  r.rhs_bound = q * std::pow(H, k) * std::sqrt(f.exp_moment(2.0 * k, c));
  r.parameters = {{"H", H}, {"k", k}, {"c", c}, {"T", T}, {"weight", sigma.name()}, {"support", {x_lo * T, x_hi * T}}};
  if (g.empty() || !(x_hi > x_lo)) {
    r.lhs = 0;
    r.fitted_constant = 0;
    return r;
  }
  auto sum_at = [&](double t) {
    double v = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      double a = s * (g[i] - t), b = s * (-g[i] - t);
      v += w[i] * (q_kernel(a) + q_kernel(b));
    }
    return v;
  };
  // panels of half the Q scale in t; 8-point GL on each
  double a = x_lo * T, b = x_hi * T, step = 0.5 / s;
  std::size_t panels = static_cast<std::size_t>(std::ceil((b - a) / step));
  std::vector<double> part(panels);
  const auto& gl = gauss_legendre(8);
  parallel_for(panels, jobs, [&](std::size_t p) {
    double lo = a + (b - a) * double(p) / double(panels), hi = a + (b - a) * double(p + 1) / double(panels);
    double c0 = 0.5 * (lo + hi), hw = 0.5 * (hi - lo), acc = 0;
    for (int i = 0; i < 8; ++i) {
      double t = c0 + hw * gl.x[i];
      acc += gl.w[i] * sigma(t / T) / T * std::pow(std::fabs(sum_at(t)), k);
    }
    part[p] = acc * hw;
  });
  double lhs = 0;
  for (double v : part) lhs += v;
  r.lhs = lhs;
  r.fitted_constant = r.rhs_bound > 0 ? lhs / r.rhs_bound : 0;
  return r;
}

// ---------------------------------------------------------------- synthetic ensembles

struct SyntheticEnsemble {
  ZeroTable table;
  double density_constant;
  double target_height;
};

// Thinned Poisson ordinates with intensity max(0, Omega)/2pi on (0, height];
// a fraction of them get |A| ~ Exp(c). Deterministic in seed.
inline SyntheticEnsemble synthesize_offline_zeros(double T, double c, double offaxis_fraction, std::uint64_t seed,
                                                  double height = 0) {
  if (!(T >= 100)) throw Error(ErrorKind::range_error, "T: must be >= 100");
  if (!(c > 0 && c < 1)) throw Error(ErrorKind::range_error, "c: must lie in (0, 1)");
  if (!(offaxis_fraction >= 0 && offaxis_fraction <= 1))
    throw Error(ErrorKind::range_error, "offaxis_fraction: must lie in [0, 1]");
  if (height <= 0) height = T;
  // Omega increases for xi > 1, so its value at the top bounds the intensity
  double lam = std::max(omega(height), omega(0.0)) / kTwoPi + 1e-9;
  lam = std::max(lam, 0.05);
  std::uint64_t ctr = 0;
  auto draw = [&] { return unit_uniform(mix64(seed, ctr++)); };
  ZeroTable tab;
  double x = 0;
  while (true) {
    x += -std::log1p(-draw()) / lam;
    if (x > height) break;
    double keep = std::max(0.0, omega(x)) / kTwoPi / lam;
    double u = draw();
    double A = 0;
    double v = draw();
    double e = draw();
    if (u >= keep) continue;
    if (v < offaxis_fraction) A = -std::log1p(-e) / c;
    if (!tab.ordinates.empty() && !(x > tab.ordinates.back())) continue;  // measure-zero tie
    tab.ordinates.push_back(x);
    tab.off_axis.push_back(A);
  }
  tab.t_min = 0;
  tab.t_max = height;
  tab.ref_height = T;
  tab.source = Source::synthetic;
  tab.certified = false;
  tab.count_below = 0;
  tab.finalize();
  return {std::move(tab), c, T};
}

// ---------------------------------------------------------------- Fujii moments

struct FujiiResult {
  double moment;        // (1/H) \int_T^{T+H} (S(t+h) - S(t))^{2k} dt
  double main_term;     // c_{2k} pi^{-2k} log^k(2 + h log T)
  double main_term_2k;  // c_{2k} pi^{-2k} log^{2k}(2 + h log T), the printed exponent
  double ratio;         // moment / main_term
};

inline FujiiResult fujii_moment(const ZeroTable& tab, double T, double H, double h, int k, double a = 0.05) {
  if (k < 1) throw Error(ErrorKind::range_error, "k: must be >= 1");
  if (!(a > 0)) throw Error(ErrorKind::range_error, "a: must be > 0");
  if (!(H >= std::pow(T, 0.5 + a) * (1 - 1e-12) && H <= T))
    throw Error(ErrorKind::range_error, "H: must satisfy T^(1/2+a) <= H <= T");
  if (!(h >= 0 && h <= H - std::pow(H / std::sqrt(T), 0.125)))
    throw Error(ErrorKind::range_error, "h: must satisfy 0 <= h <= H - (H/sqrt T)^(1/8)");
  check_coverage(tab, T, T + H + h, "fujii_moment");
  double lt = std::log(T), L = std::log(2 + h * lt);
  double c2k = gaussian_moment(2 * k);
  FujiiResult r;
  r.main_term = c2k * std::pow(kPi, -2.0 * k) * std::pow(L, k);
  r.main_term_2k = c2k * std::pow(kPi, -2.0 * k) * std::pow(L, 2 * k);
  if (h == 0) {
    r.moment = 0;
    r.ratio = 0;
    return r;
  }
  // N(t+h) - N(t) = #{t <= gamma < t+h}: +1 at gamma - h, -1 at gamma
  std::vector<std::pair<double, int>> ev;
  for (std::size_t i = tab.lower(T); i < tab.size() && tab.ordinates[i] < T + H + h; ++i) {
    ev.push_back({tab.ordinates[i] - h, tab.mult(i)});
    ev.push_back({tab.ordinates[i], -tab.mult(i)});
  }
  std::sort(ev.begin(), ev.end());
  // D at t = T: zeros in [T, T+h)
  long long D = static_cast<long long>(tab.stored_below(T + h) - tab.stored_below(T));
  std::size_t e = 0;
  while (e < ev.size() && ev[e].first <= T) ++e;  // already reflected in D
  const auto& gl = gauss_legendre(8);
  auto theta_diff = [&](double t) { return (riemann_siegel_theta(t + h) - riemann_siegel_theta(t)) / kPi; };
  double acc = 0, prev = T, end = T + H;
  auto integrate_piece = [&](double lo, double hi) {
    if (hi <= lo) return;
    // the theta part is smooth; split long gaps so 8 nodes stay exact
    int parts = 1 + static_cast<int>((hi - lo) / 0.5);
    for (int p = 0; p < parts; ++p) {
      double x0 = lo + (hi - lo) * p / parts, x1 = lo + (hi - lo) * (p + 1) / parts;
      double cm = 0.5 * (x0 + x1), hw = 0.5 * (x1 - x0), s = 0;
      for (int i = 0; i < 8; ++i) s += gl.w[i] * std::pow(double(D) - theta_diff(cm + hw * gl.x[i]), 2 * k);
      acc += s * hw;
    }
  };
  for (; e < ev.size() && ev[e].first < end; ++e) {
    integrate_piece(prev, ev[e].first);
    prev = ev[e].first;
    D += ev[e].second;
  }
  integrate_piece(prev, end);
  r.moment = acc / H;
  r.ratio = r.moment / r.main_term;
  return r;
}

// ---------------------------------------------------------------- envelope-weighted moments

// \int sigma(t/T)/T g(t) dt for g piecewise constant between sorted events;
// events (x, dD) change the count D
namespace detail {
template <class G>
double weighted_sweep(std::vector<std::pair<double, int>> ev, long long D0, double a, double b, const SmoothingWeight& s,
                      double T, G&& g) {
  std::sort(ev.begin(), ev.end());
  const auto& gl = gauss_legendre(8);
  long long D = D0;
  double acc = 0, prev = a;
  auto piece = [&](double lo, double hi) {
    if (hi <= lo || g(D) == 0) return;
    // sigma varies on scale ~ width*T; 8 nodes per piece of at most 0.01 T width
    int parts = 1 + static_cast<int>((hi - lo) / (0.01 * T * s.width));
    for (int p = 0; p < parts; ++p) {
      double x0 = lo + (hi - lo) * p / parts, x1 = lo + (hi - lo) * (p + 1) / parts;
      double cm = 0.5 * (x0 + x1), hw = 0.5 * (x1 - x0), v = 0;
      for (int i = 0; i < 8; ++i) v += gl.w[i] * s((cm + hw * gl.x[i]) / T);
      acc += g(D) * v * hw / T;
    }
  };
  for (auto& [x, d] : ev) {
    if (x <= a) {
      D += d;
      continue;
    }
    if (x >= b) break;
    piece(prev, x);
    prev = x;
    D += d;
  }
  piece(prev, b);
  return acc;
}
}  // namespace detail

// (1/T)\int sigma(t/T) |N(t + 2pi(l+1)/log T) - N(t + 2pi l/log T)|^k dt,
// reported with rhs = ||sigma||_Q
inline DensityReport cell_count_moment(const ZeroTable& tab, const SmoothingWeight& sigma, long long ell, int k,
                                       double T) {
  double lt = std::log(T), u0 = kTwoPi * double(ell) / lt, u1 = kTwoPi * double(ell + 1) / lt;
  double x_lo, x_hi;
  weight_support(sigma, x_lo, x_hi);
  double a = std::max(x_lo * T, tab.t_min - u0), b = std::min(x_hi * T, tab.t_max - u1);
  // count of zeros in [t + u0, t + u1): +1 at gamma - u1, -1 at gamma - u0
  std::vector<std::pair<double, int>> ev;
  for (std::size_t i = tab.lower(a + u0); i < tab.size() && tab.ordinates[i] < b + u1; ++i) {
    ev.push_back({tab.ordinates[i] - u1, tab.mult(i)});
    ev.push_back({tab.ordinates[i] - u0, -tab.mult(i)});
  }
  DensityReport r;
  r.lhs = detail::weighted_sweep(ev, 0, a, b, sigma, T, [&](long long D) { return std::pow(double(std::llabs(D)), k); });
  r.rhs_bound = q_norm(sigma);
  r.fitted_constant = r.lhs / r.rhs_bound;
  r.parameters = {{"ell", ell}, {"k", k}, {"T", T}, {"weight", sigma.name()}, {"support", {a, b}}};
  return r;
}

// \int sigma(t/T)/T |Delta_eta(t)|^k dt against
// ||sigma||_Q (||M_1 eta_T||_1^k + (eps_T(eta_T) log T)^k), eta_T = eta(./n)
inline DensityReport envelope_moment(const ZeroTable& tab, const SmoothingWeight& sigma, const TestFunction& eta,
                                     double n, int k, double T, std::int64_t strata = 4000, std::uint64_t seed = 0,
                                     int jobs = 1) {
  // uncentred, unlike smoothed_moment
  double x_lo, x_hi;
  weight_support(sigma, x_lo, x_hi);
  double reach = kTwoPi * n * (std::fabs(eta.lo()) + std::fabs(eta.hi())) / std::log(T);
  x_lo = std::max(x_lo, (tab.t_min + reach) / T);
  x_hi = std::min(x_hi, (tab.t_max - reach) / T);
  WeightSampler ws(sigma, x_lo, x_hi);
  std::size_t S = static_cast<std::size_t>(strata);
  std::vector<double> vals(S);
  parallel_for(S, jobs, [&](std::size_t s) {
    double u = (double(s) + unit_uniform(mix64(seed, s))) / double(S);
    vals[s] = std::pow(std::fabs(linear_statistic(tab, eta, n, T, T * ws(u))), k);
  });
  double lhs = 0;
  for (double v : vals) lhs += v;
  lhs *= ws.captured_mass() / double(S);
  TestFunction etaT = eta.dilate(1.0 / n);
  double M1 = l1_norm(envelope_M(1.0, etaT)), eps = tail_eps(T, etaT);
  DensityReport r;
  r.lhs = lhs;
  r.rhs_bound = q_norm(sigma) * (std::pow(M1, k) + std::pow(eps * std::log(T), k));
  r.fitted_constant = lhs / r.rhs_bound;
  r.parameters = {{"n", n}, {"k", k}, {"T", T}, {"weight", sigma.name()}, {"M1", M1}, {"eps_T", eps}};
  return r;
}

// ---------------------------------------------------------------- ensemble study

// one (statistic, sigma offset, H, k) cell averaged over ensemble draws;
// sigma - 1/2 = offset / log T, equivalently |A| > offset
struct WindowsCell {
  std::string statistic;  // "windowed" or "q_smoothed"
  double offset = 0, H = 0;
  int k = 0;
  int draws = 0;
  double mean_lhs = 0, rhs_bound = 0, mean_fitted = 0, min_fitted = 0, max_fitted = 0;

  nlohmann::ordered_json to_json() const {
    return {{"statistic", statistic}, {"offset", offset},     {"H", H},
            {"k", k},                 {"draws", draws},       {"mean_lhs", mean_lhs},
            {"rhs_bound", rhs_bound}, {"mean_fitted", mean_fitted}, {"min_fitted", min_fitted},
            {"max_fitted", max_fitted}};
  }
};

struct WindowsStudy {
  double T, c, offaxis_fraction;
  int draws, q_draws;
  std::vector<double> offsets, Hs;
  std::vector<int> ks;
  SmoothingWeight weight = SmoothingWeight::uniform();
  std::uint64_t seed = 0;
  int jobs = 1;
};

// windowed_Lk over every draw; q_smoothed_Lk on the first q_draws draws at the smallest offset
inline std::vector<WindowsCell> density_windows_study(const WindowsStudy& st) {
  if (st.draws < 1) throw Error(ErrorKind::range_error, "draws: must be >= 1");
  if (st.q_draws < 0 || st.q_draws > st.draws) throw Error(ErrorKind::range_error, "q_draws: must lie in [0, draws]");
  double lt = std::log(st.T);
  for (double o : st.offsets)
    if (!(o > 0)) throw Error(ErrorKind::range_error, "offsets: must be > 0");
  double Hmax = 1;
  for (double H : st.Hs) Hmax = std::max(Hmax, H);
  double x_lo = 1, x_hi = 2;
  weight_support(st.weight, x_lo, x_hi);
  double height = st.T + Hmax / lt + 1;
  if (st.q_draws > 0) height = std::max(height, std::min(x_hi, 3.0) * st.T);

  std::size_t D = static_cast<std::size_t>(st.draws);
  std::vector<std::vector<DensityReport>> w(D), q(D);
  // draws in parallel, q sums serial inside each draw
  parallel_for(D, st.jobs, [&](std::size_t d) {
    auto ens = synthesize_offline_zeros(st.T, st.c, st.offaxis_fraction, mix64(st.seed, d), height);
    for (double o : st.offsets)
      for (double H : st.Hs)
        for (int k : st.ks) w[d].push_back(windowed_Lk(ens.table, 0.5 + o / lt, H, k, st.T, st.c));
    if (static_cast<int>(d) < st.q_draws) {
      auto f = StepFn::indicator_above(*std::min_element(st.offsets.begin(), st.offsets.end()));
      for (double H : st.Hs)
        for (int k : st.ks) q[d].push_back(q_smoothed_Lk(ens.table, f, H, k, st.T, st.weight, st.c, 1));
    }
  });

  std::vector<WindowsCell> out;
  auto collect = [&](const std::string& name, std::size_t idx, double o, double H, int k,
                     const std::vector<std::vector<DensityReport>>& src, int nd) {
    WindowsCell cell{name, o, H, k, nd};
    cell.min_fitted = INFINITY;
    cell.max_fitted = -INFINITY;
    for (int d = 0; d < nd; ++d) {
      const auto& r = src[static_cast<std::size_t>(d)][idx];
      cell.mean_lhs += r.lhs / nd;
      cell.mean_fitted += r.fitted_constant / nd;
      cell.min_fitted = std::min(cell.min_fitted, r.fitted_constant);
      cell.max_fitted = std::max(cell.max_fitted, r.fitted_constant);
      cell.rhs_bound = r.rhs_bound;
    }
    out.push_back(cell);
  };
  std::size_t i = 0;
  for (double o : st.offsets)
    for (double H : st.Hs)
      for (int k : st.ks) collect("windowed", i++, o, H, k, w, st.draws);
  i = 0;
  if (st.q_draws > 0) {
    double o = *std::min_element(st.offsets.begin(), st.offsets.end());
    for (double H : st.Hs)
      for (int k : st.ks) collect("q_smoothed", i++, o, H, k, q, st.q_draws);
  }
  return out;
}

}  // namespace mesozeta
