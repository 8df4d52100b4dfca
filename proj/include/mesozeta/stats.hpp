#pragma once

// Linear statistics over zero tables, their smoothed variants, and the
// Monte Carlo CLT harness.

#include <gsl/gsl_sf_expint.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "specialfn.hpp"
#include "testfn.hpp"
#include "zeros.hpp"

namespace mesozeta {

// x = scale * (gamma - t) with scale = log T / (2 pi n)
inline double stat_scale(double T, double n) { return std::log(T) / (kTwoPi * n); }

// uniform double in [0, 1) from a 64-bit word
inline double unit_uniform(std::uint64_t w) { return double(w >> 11) * 0x1p-53; }

// ---------------------------------------------------------------- plain statistic

inline double linear_statistic(const ZeroTable& tab, const TestFunction& eta, double n, double T, double t) {
  if (eta.empty()) return 0;
  double s = stat_scale(T, n);
  double lo = t + eta.lo() / s, hi = t + eta.hi() / s;
  check_coverage(tab, lo, hi, "linear_statistic");
  double sum = 0;
  // pad by an ulp-scale margin; eta itself decides membership
  double pad = 1e-12 * (1 + std::fabs(hi));
  for_each_signed_zero(tab, lo - pad, hi + pad, [&](double g, double, int m) { sum += m * eta(s * (g - t)); });
  return sum;
}

// ---------------------------------------------------------------- smoothed statistic

// Everything needed to evaluate Delta' and Delta'' quickly for one (eta, K, n, T).
struct SmoothedStatistic {
  TestFunction eta;
  BumpKernel K;
  double n, T, scale;
  SmoothedProfile profile;

  SmoothedStatistic(const TestFunction& e, const BumpKernel& k, double n_, double T_)
      : eta(e), K(k), n(n_), T(T_), scale(stat_scale(T_, n_)), profile(k, n_, e) {}

  // height window that contributes
  double half_window() const { return profile.reach() / scale; }

  // F(scale (gamma - t) - i y) + F(... + i y) halves, i.e. Re F at the pair
  double pair_value(double x, double y) const {
    if (y == 0) return profile(x);
    return bandlimited_convolve(K, n, eta, cplx(x, -y)).real();
  }

  // use_off_axis: Delta''; otherwise Delta'
  double operator()(const ZeroTable& tab, double t, bool use_off_axis) const {
    double w = half_window();
    check_coverage(tab, t - w, t + w, "linear_statistic_smoothed");
    double lt = std::log(T), sum = 0;
    for_each_signed_zero(tab, t - w, t + w, [&](double g, double A, int m) {
      double x = scale * (g - t);
      // off-axis pair gamma0 -+ i A / log T, rescaled: y = A / (2 pi n)
      double y = use_off_axis ? scale * A / lt : 0.0;
      sum += m * pair_value(x, y);
    });
    return sum;
  }
};

inline double linear_statistic_smoothed(const ZeroTable& tab, const TestFunction& eta, const BumpKernel& K, double n,
                                        double T, double t, bool use_off_axis) {
  return SmoothedStatistic(eta, K, n, T)(tab, t, use_off_axis);
}

struct GTerm {
  double ordinate;
  double G;
};

// per-zero G_gamma = F(z-) + F(z+) - 2 F(x); zero for on-axis zeros
inline std::vector<GTerm> g_gamma_terms(const ZeroTable& tab, const TestFunction& eta, const BumpKernel& K, double n,
                                        double T, double t, double* abs_sum = nullptr) {
  SmoothedStatistic st(eta, K, n, T);
  double w = st.half_window(), lt = std::log(T);
  check_coverage(tab, t - w, t + w, "g_gamma_terms");
  std::vector<GTerm> out;
  double s = 0;
  for_each_signed_zero(tab, t - w, t + w, [&](double g, double A, int m) {
    double G = 0;
    if (A != 0) {
      double x = st.scale * (g - t), y = st.scale * A / lt;
      G = 2 * (st.pair_value(x, y) - bandlimited_convolve(K, n, eta, cplx(x, 0)).real());
    }
    out.push_back({g, m * G});
    s += std::fabs(m * G);
  });
  if (abs_sum) *abs_sum = s;
  return out;
}

// ---------------------------------------------------------------- predictions

inline double predicted_mean(const TestFunction& eta, double n) { return n * eta.integral(); }

// \int_{-n}^{n} |x| |eta^(x)|^2 dx for real eta; `period` is the oscillation
// scale of |eta^|^2 (1 / support width for compact eta)
template <class Fn>
double predicted_variance_of(const Fn& eta, double n, double period) {
  if (!(n >= 1)) throw Error(ErrorKind::range_error, "predicted_variance needs n >= 1");
  auto f = [&](double x) { return x * std::norm(eta.ft(x)); };
  double s = 0, c = 0;  // Kahan over panels
  long long panels = static_cast<long long>(std::ceil(n / period));
  for (long long i = 0; i < panels; ++i) {
    double a = double(i) * period, b = std::min(n, double(i + 1) * period);
    double v = integrate(f, a, b, 1e-15, 1e-10, 30) - c;
    double tt = s + v;
    c = (tt - s) - v;
    s = tt;
  }
  return 2 * s;
}

inline double predicted_variance(const TestFunction& eta, double n) {
  return predicted_variance_of(eta, n, 1.0 / std::max(1.0, eta.hi() - eta.lo()));
}

// closed form for eta = 1_[0,1]: (log(2 pi n) + gamma_E - Ci(2 pi n)) / pi^2
inline double predicted_variance_indicator(double n) {
  const double euler = 0.57721566490153286061;
  return (std::log(kTwoPi * n) + euler - gsl_sf_Ci(kTwoPi * n)) / (kPi * kPi);
}

// ---------------------------------------------------------------- archimedean means

struct ArchimedeanTerm {
  double value;           // \int F(scale (xi - t)) Omega(xi)/2pi d xi
  double deviation;       // value - n \int eta
  double scaled_deviation;  // deviation * log T
};

// smoothed: F = K_n * eta, given its tabulated profile
inline ArchimedeanTerm archimedean_term(const SmoothedProfile& prof, const TestFunction& eta, const BumpKernel& K,
                                        double n, double T, double t) {
  if (!(T >= 100)) throw Error(ErrorKind::range_error, "archimedean_term needs T >= 100");
  double s = stat_scale(T, n), R = prof.reach();
  // x = s (xi - t): \int F(x) Omega(t + x/s) / (2 pi s) dx; F is band-limited to
  // kappa n, so fixed 20-point panels of two periods are exact to rounding
  auto f = [&](double x) { return prof(x) * omega(t + x / s); };
  double panel = 2.0 / (K.kappa() * n);
  int panels = static_cast<int>(std::ceil(2 * R / panel));
  double v = gl_panels(f, -R, R, panels, 20) / (kTwoPi * s);
  double dev = v - predicted_mean(eta, n);
  return {v, dev, dev * std::log(T)};
}

inline ArchimedeanTerm archimedean_term(const TestFunction& eta, const BumpKernel& K, double n, double T, double t) {
  return archimedean_term(SmoothedProfile(K, n, eta), eta, K, n, T, t);
}

// unsmoothed: \int eta(scale (xi - t)) Omega(xi)/2pi d xi, exact piece breakpoints
inline double archimedean_mean(const TestFunction& eta, double n, double T, double t) {
  double s = stat_scale(T, n);
  double v = 0;
  for (auto& q : eta.pieces()) {
    auto g = [&](double xi) { return q.at(s * (xi - t)) * omega(xi) / kTwoPi; };
    v += integrate(g, t + q.a / s, t + q.b / s, 1e-14, 1e-12, 30);
  }
  return v;
}

// ---------------------------------------------------------------- moments

inline double gaussian_moment(int k) {
  if (k < 0) throw Error(ErrorKind::range_error, "gaussian_moment needs k >= 0");
  if (k % 2) return 0;
  double v = 1;
  for (int j = k - 1; j > 1; j -= 2) v *= j;
  return v;
}

struct MomentReport {
  double mean = 0, variance = 0;
  std::vector<double> normalized_moments;  // k = 3..6
  double ks = 0;
  std::int64_t samples = 0;
  double predicted_mean = 0, predicted_variance = 0;
  double T = 0, n = 0;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["mean"] = mean;
    j["variance"] = variance;
    for (int k = 3; k <= 6; ++k) j["m" + std::to_string(k)] = normalized_moments.at(k - 3);
    j["ks"] = ks;
    j["samples"] = samples;
    j["predicted_mean"] = predicted_mean;
    j["predicted_variance"] = predicted_variance;
    j["T"] = T;
    j["n"] = n;
    return j;
  }
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// moments about the mean, KS of the standardized sample against N(0,1)
inline MomentReport moment_report(std::vector<double> x, double centre = std::numeric_limits<double>::quiet_NaN(),
                                  double norm_var = std::numeric_limits<double>::quiet_NaN()) {
  MomentReport r;
  std::size_t N = x.size();
  r.samples = static_cast<std::int64_t>(N);
  if (N == 0) {
    r.normalized_moments.assign(4, 0);
    return r;
  }
  double m = 0;
  for (double v : x) m += v;
  m /= double(N);
  r.mean = m;
  double mu = std::isnan(centre) ? m : centre;
  double c[7] = {0};
  for (double v : x) {
    double d = v - mu, p = d * d;
    c[2] += p;
    for (int k = 3; k <= 6; ++k) {
      p *= d;
      c[k] += p;
    }
  }
  for (int k = 2; k <= 6; ++k) c[k] /= double(N);
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  r.variance = N > 1 ? ss / double(N - 1) : 0;
  double var = std::isnan(norm_var) ? c[2] : norm_var;
  double sd = std::sqrt(var);
  for (int k = 3; k <= 6; ++k) r.normalized_moments.push_back(sd > 0 ? c[k] / std::pow(sd, k) : 0);
  // KS: sup |F_emp - Phi|, with both one-sided gaps at each jump
  if (sd > 0) {
    for (double& v : x) v = (v - mu) / sd;
    std::sort(x.begin(), x.end());
    double d = 0;
    for (std::size_t i = 0; i < N; ++i) {
      double F = normal_cdf(x[i]);
      d = std::max({d, double(i + 1) / double(N) - F, F - double(i) / double(N)});
    }
    r.ks = d;
  }
  return r;
}

// ---------------------------------------------------------------- weights as samplers

// inverse CDF of sigma on [x_lo, x_hi], 2^16 cells, linear within a cell
class WeightSampler {
 public:
  WeightSampler(const SmoothingWeight& w, double x_lo, double x_hi, int cells = 1 << 16) : lo_(x_lo), hi_(x_hi) {
    if (!(x_hi > x_lo)) throw Error(ErrorKind::range_error, "empty weight support");
    cdf_.assign(static_cast<std::size_t>(cells) + 1, 0.0);
    double h = (x_hi - x_lo) / cells, prev = w(x_lo);
    for (int i = 1; i <= cells; ++i) {
      double v = w(x_lo + h * i);
      cdf_[i] = cdf_[i - 1] + 0.5 * h * (prev + v);
      prev = v;
    }
    mass_ = cdf_.back();
    if (!(mass_ > 0)) throw Error(ErrorKind::range_error, "weight has no mass on its support");
  }
  double captured_mass() const { return mass_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  // u in [0,1) -> x
  double operator()(double u) const {
    double target = u * mass_;
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    std::size_t i = std::min<std::size_t>(cdf_.size() - 1, static_cast<std::size_t>(it - cdf_.begin()));
    if (i == 0) i = 1;
    double a = cdf_[i - 1], b = cdf_[i], f = b > a ? (target - a) / (b - a) : 0.5;
    double h = (hi_ - lo_) / double(cdf_.size() - 1);
    return lo_ + h * (double(i - 1) + f);
  }

 private:
  double lo_, hi_, mass_ = 0;
  std::vector<double> cdf_;
};

// support of sigma in x = t/T that carries all but ~1e-3 of its mass
inline void weight_support(const SmoothingWeight& w, double& lo, double& hi) {
  switch (w.kind) {
    case WeightKind::uniform:
      lo = 1, hi = 2;
      return;
    case WeightKind::fejer:
    case WeightKind::cauchy:
      lo = w.center - 300 * w.width, hi = w.center + 300 * w.width;
      return;
    case WeightKind::fejer_indicator:
      lo = 1 - 300 * w.width, hi = 2 + 300 * w.width;
      return;
  }
}

// ---------------------------------------------------------------- experiments

struct ExperimentConfig {
  double T = 1e6;
  double n = 5;
  TestFunction eta = TestFunction::indicator(0, 1);
  BumpKernel kernel{1};
  std::optional<SmoothingWeight> weight;  // empty: uniform on [T, 2T]
  std::int64_t samples = 20000;
  std::uint64_t master_seed = 0;
  int jobs = 1;

  void validate() const {
    if (!(T >= 100)) throw Error(ErrorKind::range_error, "T: must be >= 100");
    if (!(n >= 1)) throw Error(ErrorKind::range_error, "n: must be >= 1");
    if (!(n <= std::log(T) / 2))
      throw Error(ErrorKind::range_error, "n: must be <= (log T)/2 = " + std::to_string(std::log(T) / 2));
    if (samples < 1) throw Error(ErrorKind::range_error, "samples: must be >= 1");
    if (eta.empty()) throw Error(ErrorKind::range_error, "eta: empty test function");
  }
  // table coverage needed by the plain statistic over [T, 2T]
  double slack() const { return kTwoPi * n * (std::fabs(eta.lo()) + std::fabs(eta.hi())) / std::log(T); }
};

struct CltRun {
  MomentReport report;
  std::vector<double> t, delta;
  double captured_mass = 1;
};

inline CltRun sample_clt(const ZeroTable& tab, const ExperimentConfig& cfg) {
  cfg.validate();
  double x_lo = 1, x_hi = 2;
  std::optional<WeightSampler> ws;
  if (cfg.weight) {
    weight_support(*cfg.weight, x_lo, x_hi);
    // keep to what the table can serve
    double s = cfg.slack();
    x_lo = std::max(x_lo, (tab.t_min + s) / cfg.T);
    x_hi = std::min(x_hi, (tab.t_max - s) / cfg.T);
    ws.emplace(*cfg.weight, x_lo, x_hi);
  }
  check_coverage(tab, cfg.T * x_lo - cfg.slack(), cfg.T * x_hi + cfg.slack(), "sample_clt");
  CltRun run;
  std::size_t N = static_cast<std::size_t>(cfg.samples);
  run.t.resize(N);
  run.delta.resize(N);
  parallel_for(N, cfg.jobs, [&](std::size_t i) {
    double u = unit_uniform(mix64(cfg.master_seed, i));
    double t = ws ? cfg.T * (*ws)(u) : cfg.T * (1 + u);
    run.t[i] = t;
    run.delta[i] = linear_statistic(tab, cfg.eta, cfg.n, cfg.T, t);
  });
  if (ws) run.captured_mass = ws->captured_mass() / cfg.weight->mass();
  run.report = moment_report(run.delta);
  run.report.predicted_mean = predicted_mean(cfg.eta, cfg.n);
  run.report.predicted_variance = predicted_variance(cfg.eta, cfg.n);
  run.report.T = cfg.T;
  run.report.n = cfg.n;
  return run;
}

enum class MomentMode { delta, delta_prime_centered };

struct SmoothedMoment {
  double value;
  double std_error;
  std::int64_t points;
};

// \int sigma(t/T)/T (stat(t))^k dt, stratified: `strata` equal-mass strata,
// `per_stratum` seeded points in each
inline SmoothedMoment smoothed_moment(const ZeroTable& tab, const SmoothingWeight& sigma, const TestFunction& eta,
                                      const BumpKernel& K, double n, double T, int k, MomentMode mode,
                                      std::int64_t strata = 2000, int per_stratum = 2, std::uint64_t seed = 0,
                                      int jobs = 1) {
  if (k < 1) throw Error(ErrorKind::range_error, "k: must be >= 1");
  double x_lo, x_hi;
  weight_support(sigma, x_lo, x_hi);
  std::optional<SmoothedStatistic> st;
  double reach = 0;
  if (mode == MomentMode::delta_prime_centered) {
    st.emplace(eta, K, n, T);
    reach = st->half_window();
  } else {
    reach = kTwoPi * n * (std::fabs(eta.lo()) + std::fabs(eta.hi())) / std::log(T);
  }
  x_lo = std::max(x_lo, (tab.t_min + reach) / T);
  x_hi = std::min(x_hi, (tab.t_max - reach) / T);
  WeightSampler ws(sigma, x_lo, x_hi);
  std::size_t S = static_cast<std::size_t>(strata);
  std::vector<double> mean(S), var(S);
  parallel_for(S, jobs, [&](std::size_t s) {
    double acc = 0, acc2 = 0;
    for (int j = 0; j < per_stratum; ++j) {
      double u = (double(s) + unit_uniform(mix64(seed, s * std::size_t(per_stratum) + std::size_t(j)))) / double(S);
      double t = T * ws(u), v;
      if (mode == MomentMode::delta) {
        v = linear_statistic(tab, eta, n, T, t) - archimedean_mean(eta, n, T, t);
      } else {
        v = (*st)(tab, t, true) - archimedean_term(st->profile, eta, K, n, T, t).value;
      }
      double p = std::pow(v, k);
      acc += p;
      acc2 += p * p;
    }
    mean[s] = acc / per_stratum;
    var[s] = per_stratum > 1 ? (acc2 / per_stratum - mean[s] * mean[s]) * per_stratum / (per_stratum - 1) : 0;
  });
  double m = ws.captured_mass(), v = 0, e = 0;
  for (std::size_t s = 0; s < S; ++s) {
    v += mean[s];
    e += var[s] / per_stratum;
  }
  // each stratum carries mass m/S
  return {v * m / double(S), std::sqrt(e) * m / double(S), static_cast<std::int64_t>(S) * per_stratum};
}

}  // namespace mesozeta
