#include <gtest/gtest.h>

#include <mesozeta/density.hpp>

using namespace mesozeta;

namespace {

const ZeroTable& table() {
  static ZeroTable t = find_zeros(0, 10500);
  return t;
}

const SyntheticEnsemble& ensemble() {
  static SyntheticEnsemble e = synthesize_offline_zeros(1000, 0.5, 0.5, 42, 1100);
  return e;
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

ZeroTable small_table(std::vector<double> g, std::vector<double> A, double ref) {
  ZeroTable t;
  t.ordinates = std::move(g);
  t.off_axis = std::move(A);
  t.t_min = 0;
  t.t_max = 1e9;
  t.ref_height = ref;
  t.source = Source::synthetic;
  t.finalize();
  return t;
}

// N(sigma, t) by direct count
long long n_sigma(const ZeroTable& tab, double sigma, double t) {
  double thr = (sigma - 0.5) * std::log(tab.reference_height());
  long long c = 0;
  for (std::size_t i = 0; i < tab.size(); ++i)
    if (tab.ordinates[i] > 0 && tab.ordinates[i] < t && (thr == 0 ? tab.A(i) > 0 : tab.A(i) > thr)) ++c;
  return c;
}

}  // namespace

TEST(CountOffAxis, StrictThresholdAndCriticalLine) {
  double lt = std::log(1e4);
  auto t = small_table({10, 20, 30, 40}, {0, 1e-3, 2.0, 4.0}, 1e4);
  EXPECT_EQ(count_off_axis(t, 0.5, 100), 3);
  EXPECT_EQ(count_off_axis(t, 0.5 + 2.0 / lt, 100), 1);  // A == threshold is not counted
  EXPECT_EQ(count_off_axis(t, 0.5 + 1.0 / lt, 35), 1);
  EXPECT_EQ(kind_of([&] { count_off_axis(t, 1.0, 100); }), ErrorKind::range_error);
  EXPECT_EQ(kind_of([&] { count_off_axis(table(), 0.5, 2e4); }), ErrorKind::out_of_coverage);
  EXPECT_EQ(count_off_axis(table(), 0.5, 1e4), 0);
}

TEST(WindowedLk, FirstMomentTelescopes) {
  const auto& tab = ensemble().table;
  double T = 1000, sigma = 0.5 + 1.0 / std::log(T);
  for (double H : {1.0, 2.5, 5.0}) {
    double h = H / std::log(T);
    auto r = windowed_Lk(tab, sigma, H, 1, T);
    // (1/T)(\int_T^{T+h} N - \int_0^h N), N a step function
    auto intN = [&](double a, double b) {
      double acc = 0;
      std::vector<double> pts{a};
      for (double g : offaxis_ordinates(tab, sigma, b))
        if (g > a) pts.push_back(g);
      pts.push_back(b);
      for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        acc += double(n_sigma(tab, sigma, 0.5 * (pts[i] + pts[i + 1]))) * (pts[i + 1] - pts[i]);
      return acc;
    };
    double tele = (intN(T, T + h) - intN(0, h)) / T;
    EXPECT_NEAR(r.lhs, tele, 1e-12 * std::max(1.0, tele)) << H;
    EXPECT_GT(r.lhs, 0);
  }
}

TEST(WindowedLk, MatchesRiemannSum) {
  const auto& tab = ensemble().table;
  double T = 1000, sigma = 0.5;
  for (int k : {1, 2, 3}) {
    double H = 3, h = H / std::log(T);
    auto r = windowed_Lk(tab, sigma, H, k, T);
    double step = 1e-3;
    std::vector<double> g = offaxis_ordinates(tab, sigma, T + h);
    double rs = 0;
    for (double t = 0.5 * step; t < T; t += step) {
      auto lo = std::lower_bound(g.begin(), g.end(), t), hi = std::lower_bound(g.begin(), g.end(), t + h);
      rs += std::pow(double(hi - lo), k);
    }
    rs *= step / T;
    EXPECT_NEAR(r.lhs, rs, 2e-3 * rs) << k;
  }
}

TEST(WindowedLk, ValidatesRanges) {
  const auto& tab = ensemble().table;
  EXPECT_EQ(kind_of([&] { windowed_Lk(tab, 0.5, 0.5, 1, 1000); }), ErrorKind::range_error);
  EXPECT_EQ(kind_of([&] { windowed_Lk(tab, 0.5, 6.0, 1, 1000); }), ErrorKind::range_error);
  EXPECT_EQ(kind_of([&] { windowed_Lk(tab, 0.5, 2, 0, 1000); }), ErrorKind::range_error);
  EXPECT_EQ(kind_of([&] { windowed_Lk(tab, 0.5, 2, 1, 5000); }), ErrorKind::out_of_coverage);
}

TEST(WindowedLk, ShapeAndFit) {
  auto r = windowed_Lk(ensemble().table, 0.5 + 2 / std::log(1000.0), 2, 2, 1000, 0.5);
  EXPECT_DOUBLE_EQ(r.rhs_bound, 4 * std::pow(1000.0, -0.5 * 2 / std::log(1000.0)));
  EXPECT_DOUBLE_EQ(r.fitted_constant, r.lhs / r.rhs_bound);
  EXPECT_EQ(r.parameters["k"], 2);
}

TEST(StepFn, ExponentialMoments) {
  auto f = StepFn::indicator_above(3);
  EXPECT_NEAR(f.exp_moment(4, 0.5), std::exp(-1.5) / 0.5, 1e-15);
  StepFn g{{0, 1, 2}, {2, 0, 1}};
  EXPECT_NEAR(g.exp_moment(2, 1), 4 * (1 - std::exp(-1.0)) + std::exp(-2.0), 1e-15);
  EXPECT_EQ(g(0.5), 2);
  EXPECT_EQ(g(1.5), 0);
  EXPECT_EQ(g(9), 1);
  EXPECT_EQ(kind_of([] { StepFn{{0, 1}, {1, -1}}.validate(); }), ErrorKind::range_error);
  EXPECT_EQ(kind_of([] { StepFn{{1}, {1}}.validate(); }), ErrorKind::range_error);
}

TEST(QSmoothed, ZeroFunctionGivesZero) {
  auto r = q_smoothed_Lk(ensemble().table, StepFn::zero(), 2, 1, 1000, SmoothingWeight::uniform());
  EXPECT_EQ(r.lhs, 0);
  EXPECT_EQ(r.fitted_constant, 0);
}

TEST(QSmoothed, IndicatorReducesToPowerShape) {
  double T = 1e4, c = 0.5, sigma = 0.5 + 4 / std::log(T), alpha = (sigma - 0.5) * std::log(T);
  auto tab = small_table({15000}, {5}, T);
  auto w = SmoothingWeight::fejer(1.5, 0.1);
  auto r = q_smoothed_Lk(tab, StepFn::indicator_above(alpha), 2, 2, T, w, c);
  double shape = q_norm(w) * 4 * std::pow(T, -0.5 * c * (sigma - 0.5)) / std::sqrt(c);
  EXPECT_NEAR(r.rhs_bound, shape, 1e-12 * shape);
}

TEST(QSmoothed, LoneZeroMatchesQuadrature) {
  double T = 1e4, H = 2, s = std::log(T) / (2 * std::numbers::pi * H);
  auto tab = small_table({15000}, {5}, T);
  auto w = SmoothingWeight::fejer(1.5, 0.1);
  auto r = q_smoothed_Lk(tab, StepFn::indicator_above(1), H, 1, T, w);
  double lo, hi;
  weight_support(w, lo, hi);
  lo = std::max(lo, 0.0);
  auto f = [&](double t) { return w(t / T) / T * (q_kernel(s * (15000 - t)) + q_kernel(s * (-15000 - t))); };
  double ref = integrate_pts(f, {lo * T, 14000, 14990, 15000, 15010, 16000, hi * T}, 1e-14, 1e-11, 40);
  EXPECT_NEAR(r.lhs, ref, 1e-8 * ref);
}

TEST(Synthetic, DeterministicAndCalibrated) {
  auto a = synthesize_offline_zeros(5000, 0.5, 0.3, 7);
  auto b = synthesize_offline_zeros(5000, 0.5, 0.3, 7);
  auto c = synthesize_offline_zeros(5000, 0.5, 0.3, 8);
  EXPECT_EQ(a.table.ordinates, b.table.ordinates);
  EXPECT_EQ(a.table.off_axis, b.table.off_axis);
  EXPECT_NE(a.table.ordinates, c.table.ordinates);
  double expect = riemann_siegel_theta(5000) / std::numbers::pi;
  EXPECT_NEAR(double(a.table.size()), expect, 0.05 * expect);
  EXPECT_EQ(a.table.source, Source::synthetic);
  EXPECT_EQ(a.table.reference_height(), 5000);
}

TEST(Synthetic, OffAxisLaw) {
  auto e = synthesize_offline_zeros(2e4, 0.5, 0.4, 3);
  std::vector<double> A;
  for (double x : e.table.off_axis)
    if (x > 0) A.push_back(x);
  double frac = double(A.size()) / double(e.table.size());
  EXPECT_NEAR(frac, 0.4, 0.02);
  double mean = 0;
  for (double x : A) mean += x;
  mean /= double(A.size());
  EXPECT_NEAR(mean, 2.0, 0.1);
  // P(A > a) = e^{-ca}
  double tail = double(std::count_if(A.begin(), A.end(), [](double x) { return x > 3; })) / double(A.size());
  EXPECT_NEAR(tail, std::exp(-1.5), 0.02);
}

TEST(Synthetic, ValidatesParameters) {
  EXPECT_EQ(kind_of([] { synthesize_offline_zeros(1e3, 1.5, 0.1, 1); }), ErrorKind::range_error);
  EXPECT_EQ(kind_of([] { synthesize_offline_zeros(1e3, 0.5, 1.1, 1); }), ErrorKind::range_error);
  EXPECT_EQ(kind_of([] { synthesize_offline_zeros(10, 0.5, 0.1, 1); }), ErrorKind::range_error);
}

TEST(Fujii, MatchesRiemannSum) {
  double T = 1e4, H = 200, h = 16 / std::log(T);
  const auto& tab = table();
  for (int k : {1, 2}) {
    auto r = fujii_moment(tab, T, H, h, k);
    double step = 1e-3, acc = 0;
    for (double t = T + 0.5 * step; t < T + H; t += step)
      acc += std::pow(s_of_t(tab, t + h) - s_of_t(tab, t), 2 * k);
    acc *= step / H;
    EXPECT_NEAR(r.moment, acc, 2e-3 * acc) << k;
  }
}

TEST(Fujii, MainTermsAndLimits) {
  double T = 1e4, H = 200;
  auto r = fujii_moment(table(), T, H, 4 / std::log(T), 1);
  double L = std::log(6.0);
  EXPECT_NEAR(r.main_term, L / (std::numbers::pi * std::numbers::pi), 1e-15);
  EXPECT_NEAR(r.main_term_2k, L * L / (std::numbers::pi * std::numbers::pi), 1e-15);
  EXPECT_GT(r.ratio, 0.3);
  EXPECT_LT(r.ratio, 3);
  EXPECT_EQ(fujii_moment(table(), T, H, 0, 2).moment, 0);
  EXPECT_EQ(kind_of([&] { fujii_moment(table(), T, 50, 0.1, 1); }), ErrorKind::range_error);
  EXPECT_EQ(kind_of([&] { fujii_moment(table(), T, H, 300, 1); }), ErrorKind::range_error);
  EXPECT_EQ(kind_of([&] { fujii_moment(table(), T, H, -1, 1); }), ErrorKind::range_error);
  EXPECT_EQ(kind_of([&] { fujii_moment(table(), T, H, 1, 0); }), ErrorKind::range_error);
}

TEST(CellCount, MatchesRiemannSum) {
  const auto& tab = table();
  double T = 4000;
  auto w = SmoothingWeight::fejer(1.5, 0.1);
  auto r = cell_count_moment(tab, w, 2, 2, T);
  double lt = std::log(T), u0 = 2 * 2 * std::numbers::pi / lt, u1 = 3 * 2 * std::numbers::pi / lt;
  double a = r.parameters["support"][0], b = r.parameters["support"][1], step = 1e-3, acc = 0;
  for (double t = a + 0.5 * step; t < b; t += step) {
    double d = double(tab.stored_below(t + u1) - tab.stored_below(t + u0));
    acc += w(t / T) / T * d * d;
  }
  acc *= step;
  EXPECT_NEAR(r.lhs, acc, 2e-3 * acc);
  EXPECT_GT(r.fitted_constant, 0);
}

TEST(EnvelopeMoment, CompactSupportHasNoTail) {
  auto w = SmoothingWeight::fejer(1.5, 0.05);
  auto r = envelope_moment(table(), w, TestFunction::indicator(0, 1), 3, 2, 4000, 2000, 1, 2);
  EXPECT_EQ(r.parameters["eps_T"], 0.0);
  EXPECT_GT(r.lhs, 0);
  EXPECT_GT(r.fitted_constant, 1e-4);
  EXPECT_LT(r.fitted_constant, 100);
}
