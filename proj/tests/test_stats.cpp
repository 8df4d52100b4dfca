#include <gtest/gtest.h>

#include <mesozeta/stats.hpp>

#include "oracles/oracle_values.hpp"

using namespace mesozeta;

namespace {

const ZeroTable& table() {
  static ZeroTable t = find_zeros(0, 20500);
  return t;
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io_error;
}

// one synthetic off-axis zero at height c, nothing else nearby
ZeroTable lone_zero(double c, double A) {
  ZeroTable t;
  t.ordinates = {c};
  t.off_axis = {A};
  t.t_min = 0;
  t.t_max = 1e9;
  t.source = Source::synthetic;
  t.finalize();
  return t;
}

}  // namespace

TEST(LinearStatistic, WindowExample) {
  // window [100, 100 + 6 pi / log 1e4) = [100, 102.046) holds only 101.3178...
  EXPECT_EQ(linear_statistic(table(), TestFunction::indicator(0, 1), 3, 1e4, 100), 1);
}

TEST(LinearStatistic, ZeroFreeGap) {
  // nothing between gamma_1 = 14.13 and gamma_2 = 21.02
  EXPECT_EQ(linear_statistic(table(), TestFunction::indicator(0, 1), 1, 1e4, 15), 0);
}

TEST(LinearStatistic, IndicatorCountsZeros) {
  const auto& tab = table();
  auto eta = TestFunction::indicator(0, 1);
  double T = 1e4;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    double t = 20 + 19000 * unit_uniform(mix64(7, i));
    double n = 1 + (std::log(T) / 2 - 1) * unit_uniform(mix64(8, i));
    double expect = double(count_N(tab, t + kTwoPi * n / std::log(T)) - count_N(tab, t));
    ASSERT_EQ(linear_statistic(tab, eta, n, T, t), expect) << t << " " << n;
  }
}

TEST(LinearStatistic, LinearAndTranslationCovariant) {
  const auto& tab = table();
  auto e1 = TestFunction::indicator(0, 1), e2 = TestFunction::triangle(-1, 2);
  auto sum = add(e1, e2, 2.0, -0.5);
  double T = 1e5, n = 4, s = stat_scale(T, n);
  for (std::uint64_t i = 0; i < 200; ++i) {
    double t = 1000 + 15000 * unit_uniform(mix64(3, i));
    double a = linear_statistic(tab, e1, n, T, t), b = linear_statistic(tab, e2, n, T, t);
    EXPECT_NEAR(linear_statistic(tab, sum, n, T, t), 2 * a - 0.5 * b, 1e-12);
    // eta(. - c) at t equals eta at t + c/s
    double c = 0.75;
    EXPECT_NEAR(linear_statistic(tab, e2.shift(c), n, T, t), linear_statistic(tab, e2, n, T, t + c / s), 1e-9);
  }
}

TEST(LinearStatistic, Coverage) {
  auto eta = TestFunction::indicator(0, 1);
  EXPECT_EQ(kind_of([&] { linear_statistic(table(), eta, 3, 1e4, 20499); }), ErrorKind::out_of_coverage);
}

TEST(Smoothed, OnAxisModesAgree) {
  auto eta = TestFunction::indicator(0, 1);
  BumpKernel K(1);
  SmoothedStatistic st(eta, K, 3, 1e5);
  for (double t : {3000.0, 7777.7, 12000.0}) EXPECT_EQ(st(table(), t, true), st(table(), t, false));
}

TEST(Smoothed, LoneOffAxisZero) {
  // |Delta'' - Delta'| = |G|/2 for one pair, bounded by the pointwise smoothing bound
  auto eta = TestFunction::indicator(0, 1);
  BumpKernel K(1);
  double n = 4, T = 1e4, A = 1, t = 5000;
  auto tab = lone_zero(t, A);
  double d2 = linear_statistic_smoothed(tab, eta, K, n, T, t, true);
  double d1 = linear_statistic_smoothed(tab, eta, K, n, T, t, false);
  std::vector<double> xs;
  for (double x = -5; x <= 5; x += 0.25) xs.push_back(x);
  double C = check_pointwise_bound(K, eta, n, A / (kTwoPi * n), xs);
  double bound = C * (A / n) * (1 + A / kTwoPi) * std::exp(A / 8) * q_kernel(0);
  EXPECT_GT(std::fabs(d2 - d1), 0);
  // the Step-2 bound is for |G| = 2 |Delta'' - Delta'|, up to its own constant
  EXPECT_LE(2 * std::fabs(d2 - d1), 2 * kPi * bound + 1e-15);
}

TEST(Smoothed, ApproachesPlainStatistic) {
  const auto& tab = table();
  auto eta = TestFunction::indicator(0, 1);
  BumpKernel K(1);
  double T = 1e5;
  double prev = 1e300;
  for (double n : {1.0, 2.0, 4.0}) {
    SmoothedStatistic st(eta, K, n, T);
    double s = 0;
    // window length grows with n, so compare per unit of n
    for (int i = 0; i < 200; ++i) {
      double t = 5000 + 50 * i;
      s += std::fabs(st(tab, t, false) - linear_statistic(tab, eta, n, T, t));
    }
    s /= 200;
    EXPECT_LT(s, prev);
    prev = s;
  }
}

TEST(GGamma, OnAxisTermsVanish) {
  auto eta = TestFunction::indicator(0, 1);
  BumpKernel K(1);
  double sum = -1;
  auto g = g_gamma_terms(table(), eta, K, 3, 1e5, 8000, &sum);
  EXPECT_FALSE(g.empty());
  for (auto& x : g) EXPECT_EQ(x.G, 0);
  EXPECT_EQ(sum, 0);
}

TEST(GGamma, GrowsWithDisplacement) {
  auto eta = TestFunction::indicator(0, 1);
  BumpKernel K(1);
  double n = 4, T = 1e4, t = 5000, prev = 0;
  // eps = A/(2 pi n) in (0, 0.5]
  for (double A : {0.5, 1.0, 2.0, 4.0, 8.0, 4 * kPi}) {
    double s;
    auto tab = lone_zero(t + 0.3, A);
    g_gamma_terms(tab, eta, K, n, T, t, &s);
    EXPECT_GT(s, prev) << A;
    prev = s;
  }
}

TEST(Predicted, Mean) {
  EXPECT_EQ(predicted_mean(TestFunction::indicator(0, 1), 5), 5);
  EXPECT_EQ(predicted_mean(TestFunction::triangle(-1, 1), 4), 4);
  EXPECT_EQ(predicted_mean(parse_test_function("piecewise[(0,1,1,0),(1,2,-1,0)]"), 3), 0);
}

TEST(Predicted, VarianceIndicator) {
  auto eta = TestFunction::indicator(0, 1);
  EXPECT_NEAR(predicted_variance(eta, 5), oracle::kPredVar5, 1e-9);
  EXPECT_NEAR(predicted_variance_indicator(5), oracle::kPredVar5, 1e-12);
  EXPECT_NEAR(predicted_variance(eta, 32), oracle::kPredVar32, 1e-9);
  EXPECT_NEAR(predicted_variance(eta, 5), 0.4078, 1e-4);
}

TEST(Predicted, VarianceSlowLogGrowth) {
  auto eta = TestFunction::indicator(0, 1);
  double prev = 1e300;
  for (double n : {1e2, 1e4, 1e6}) {
    double v = n < 1e6 ? predicted_variance(eta, n) : predicted_variance_indicator(n);
    EXPECT_NEAR(v, predicted_variance_indicator(n), 1e-6 * v);
    double r = v / (std::log(n) / (kPi * kPi));
    EXPECT_GT(r, 1);
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_LT(prev, 1.2);
}

TEST(Predicted, BandLimitedIsCutoffIndependent) {
  FejerSquare f{1.0};
  EXPECT_DOUBLE_EQ(predicted_variance_of(f, 1, 0.25), predicted_variance_of(f, 10, 0.25));
  EXPECT_NEAR(predicted_variance_of(f, 1, 0.25), 2 * (0.5 - 2.0 / 3 + 0.25), 1e-12);  // 2 \int_0^1 x(1-x)^2
}

TEST(Archimedean, IndicatorMainTerm) {
  auto eta = TestFunction::indicator(0, 1);
  BumpKernel K(1);
  double T = 1e6, t = 1.5e6, n = 5;
  auto a = archimedean_term(eta, K, n, T, t);
  double main = n * std::log(t / kTwoPi) / std::log(T);
  EXPECT_NEAR(a.value / main, 1, 0.02);
  EXPECT_NEAR(a.deviation, a.value - 5, 1e-15);
  EXPECT_NEAR(a.scaled_deviation, a.deviation * std::log(T), 1e-12);
  // the unsmoothed mean agrees closely since Omega is nearly constant on the window
  EXPECT_NEAR(archimedean_mean(eta, n, T, t), a.value, 1e-6);
}

TEST(Archimedean, ZeroMassAndLinearity) {
  auto eta = parse_test_function("piecewise[(0,1,1,0),(1,2,-1,0)]");
  BumpKernel K(1);
  double T = 1e6, t = 1.5e6, n = 4;
  auto a = archimedean_term(eta, K, n, T, t);
  EXPECT_LE(std::fabs(a.value), 1.0 * std::log(t + 2) / std::log(T));
  EXPECT_LE(std::fabs(a.value), 1e-6);
  auto b = archimedean_term(TestFunction::triangle(-1, 1), K, n, T, t);
  auto c = archimedean_term(TestFunction::triangle(-1, 1).scale(3), K, n, T, t);
  EXPECT_NEAR(c.value, 3 * b.value, 1e-12 * c.value);
  EXPECT_EQ(kind_of([&] { archimedean_term(eta, K, n, 50, 60); }), ErrorKind::range_error);
}

TEST(Moments, Gaussian) {
  EXPECT_EQ(gaussian_moment(0), 1);
  EXPECT_EQ(gaussian_moment(2), 1);
  EXPECT_EQ(gaussian_moment(3), 0);
  EXPECT_EQ(gaussian_moment(4), 3);
  EXPECT_EQ(gaussian_moment(6), 15);
  EXPECT_EQ(gaussian_moment(8), 105);
}

TEST(Moments, ReportOnNormalSample) {
  // Box-Muller from the seeded mixer
  std::vector<double> x;
  for (std::uint64_t i = 0; i < 200000; ++i) {
    double u = unit_uniform(mix64(11, 2 * i)) + 0x1p-54, v = unit_uniform(mix64(11, 2 * i + 1));
    x.push_back(std::sqrt(-2 * std::log(u)) * std::cos(kTwoPi * v));
  }
  auto r = moment_report(x);
  EXPECT_NEAR(r.mean, 0, 0.01);
  EXPECT_NEAR(r.variance, 1, 0.01);
  EXPECT_NEAR(r.normalized_moments[0], 0, 0.03);
  EXPECT_NEAR(r.normalized_moments[1], 3, 0.06);
  EXPECT_NEAR(r.normalized_moments[3], 15, 0.6);
  EXPECT_LT(r.ks, 1.63 / std::sqrt(200000.0));  // 1% critical value
}

TEST(Clt, DeterministicAndJobIndependent) {
  ExperimentConfig cfg;
  cfg.T = 1e4;
  cfg.n = 3;
  cfg.samples = 3000;
  cfg.master_seed = 42;
  auto a = sample_clt(table(), cfg);
  cfg.jobs = 3;
  auto b = sample_clt(table(), cfg);
  EXPECT_EQ(a.report.to_json().dump(), b.report.to_json().dump());
  EXPECT_EQ(a.report.samples, 3000);
  cfg.master_seed = 43;
  auto c = sample_clt(table(), cfg);
  EXPECT_NE(a.report.variance, c.report.variance);
  // finite-height sanity at T = 1e4: mean tracks n log(t/2pi)/log T
  EXPECT_NEAR(a.report.mean, 3 * std::log(1.5e4 / kTwoPi) / std::log(1e4), 0.1);
  EXPECT_NEAR(a.report.predicted_variance, predicted_variance_indicator(3), 1e-9);
  auto j = a.report.to_json();
  std::vector<std::string> keys;
  for (auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"mean", "variance", "m3", "m4", "m5", "m6", "ks", "samples",
                                            "predicted_mean", "predicted_variance", "T", "n"}));
}

TEST(Clt, ConfigValidation) {
  ExperimentConfig cfg;
  cfg.T = 1e4;
  cfg.n = 5;  // (log 1e4)/2 = 4.6
  try {
    cfg.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::range_error);
    EXPECT_EQ(std::string(e.what()).find("range-error: n:"), 0u);
  }
  cfg.n = 3;
  cfg.samples = 0;
  EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::range_error);
  cfg.samples = 10;
  cfg.T = 5e4;  // table ends at 20500
  EXPECT_EQ(kind_of([&] { sample_clt(table(), cfg); }), ErrorKind::out_of_coverage);
}

TEST(Clt, WeightedSampling) {
  ExperimentConfig cfg;
  cfg.T = 1e4;
  cfg.n = 3;
  cfg.samples = 2000;
  cfg.weight = SmoothingWeight::fejer(1.5, 0.05);
  auto r = sample_clt(table(), cfg);
  EXPECT_GT(r.captured_mass, 0.99);
  double inside = 0;
  for (double t : r.t) inside += (t > 1.4e4 && t < 1.6e4);
  // mass of the Fejer kernel within 2 widths of its centre is about 0.95
  EXPECT_GT(inside / 2000, 0.9);
}

TEST(SmoothedMoment, ScalingAndLowMoments) {
  auto eta = TestFunction::indicator(0, 1);
  BumpKernel K(1);
  double T = 1e4, n = 3;
  auto s1 = SmoothingWeight::fejer(1.5, 0.1);
  auto s2 = s1;
  s2.scale = 2;
  auto a = smoothed_moment(table(), s1, eta, K, n, T, 2, MomentMode::delta, 1000, 2, 5);
  auto b = smoothed_moment(table(), s2, eta, K, n, T, 2, MomentMode::delta, 1000, 2, 5);
  EXPECT_EQ(b.value, 2 * a.value);
  double pv = predicted_variance(eta, n);
  EXPECT_NEAR(a.value / pv, 1, 0.3);
  auto m1 = smoothed_moment(table(), s1, eta, K, n, T, 1, MomentMode::delta, 1000, 2, 5);
  EXPECT_LE(std::fabs(m1.value), 0.15 * std::sqrt(pv));
}

TEST(SmoothedMoment, PrimeMode) {
  auto eta = TestFunction::indicator(0, 1);
  BumpKernel K(1);
  double T = 1e4, n = 3;
  auto s1 = SmoothingWeight::fejer(1.5, 0.1);
  auto m1 = smoothed_moment(table(), s1, eta, K, n, T, 1, MomentMode::delta_prime_centered, 200, 2, 9);
  auto m2 = smoothed_moment(table(), s1, eta, K, n, T, 2, MomentMode::delta_prime_centered, 200, 2, 9);
  EXPECT_LE(std::fabs(m1.value), 0.15 * std::sqrt(predicted_variance(eta, n)));
  EXPECT_GT(m2.value, 0);
  EXPECT_LT(m2.value, predicted_variance(eta, n) * 1.5);
}
