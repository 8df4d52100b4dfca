#include <gtest/gtest.h>

#include <cstdio>
#include <sstream>

#include <mesozeta/quadrature.hpp>
#include <mesozeta/zeros_io.hpp>

#include "oracles/oracle_values.hpp"

using namespace mesozeta;

namespace {

const ZeroTable& table_20k() {
  static ZeroTable t = find_zeros(0, 20000);
  return t;
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io_error;  // sentinel: nothing thrown
}

fs::path tmpdir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("mesozeta_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(FindZeros, FirstThree) {
  auto tab = find_zeros(0, 30);
  ASSERT_EQ(tab.size(), 3u);
  EXPECT_NEAR(tab.ordinates[0], 14.134725, 5e-7);
  EXPECT_NEAR(tab.ordinates[1], 21.022040, 5e-7);
  EXPECT_NEAR(tab.ordinates[2], 25.010858, 5e-7);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(tab.ordinates[i], oracle::kFirstZeros[i], 1e-9);
  EXPECT_TRUE(tab.certified);
  EXPECT_EQ(tab.zero(0).index, 1);
}

TEST(FindZeros, FineGridScanAgrees) {
  // independent check: sign changes of Z on a 1e-3 grid
  int changes = 0;
  double prev = riemann_siegel_Z(0.0);
  for (int i = 1; i <= 30000; ++i) {
    double z = riemann_siegel_Z(i * 1e-3);
    if ((z > 0) != (prev > 0)) ++changes;
    prev = z;
  }
  EXPECT_EQ(changes, 3);
}

TEST(FindZeros, CountTo100) {
  auto tab = find_zeros(0, 100);
  EXPECT_EQ(tab.size(), 29u);
  EXPECT_EQ(count_N(tab, 100), 29);
  for (int i = 0; i < 29; ++i) EXPECT_NEAR(tab.ordinates[i], oracle::kFirstZeros[i], 1e-9);
}

TEST(FindZeros, EmptyInterval) {
  auto tab = find_zeros(10, 10);
  EXPECT_EQ(tab.size(), 0u);
  EXPECT_EQ(tab.count_below, 0);
}

TEST(FindZeros, RangeErrors) {
  EXPECT_EQ(kind_of([] { find_zeros(-1, 10); }), ErrorKind::range_error);
  EXPECT_EQ(kind_of([] { find_zeros(20, 10); }), ErrorKind::range_error);
  EXPECT_EQ(kind_of([] { find_zeros(0, 2e8); }), ErrorKind::range_error);
}

TEST(FindZeros, LocalTableKnowsItsIndex) {
  auto tab = find_zeros(74920, 74950);
  ASSERT_GT(tab.size(), 2u);
  EXPECT_EQ(tab.zero(1).index, 100000);
  EXPECT_NEAR(tab.ordinates[1], oracle::kZero100000, 1e-9);
  EXPECT_NEAR(tab.ordinates[2], oracle::kZero100001, 1e-9);
  // agrees with the table from the origin
  const auto& full = table_20k();
  auto loc = find_zeros(15000, 15100);
  EXPECT_EQ(count_N(loc, 15050), count_N(full, 15050));
  EXPECT_EQ(count_N(loc, 15100) - count_N(loc, 15000), count_N(full, 15100) - count_N(full, 15000));
}

TEST(FindZeros, JobsDoNotChangeResults) {
  FindOptions one, four;
  four.jobs = 4;
  auto a = find_zeros(30000, 31000, {}, one), b = find_zeros(30000, 31000, {}, four);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a.ordinates[i], b.ordinates[i]);
  EXPECT_EQ(a.count_below, b.count_below);
}

TEST(FindZeros, BracketWidth) {
  // refined roots sit within 1e-9 of a sign change
  auto tab = find_zeros(5000, 5050);
  for (double g : tab.ordinates) {
    double a = riemann_siegel_Z(g - 1e-9), b = riemann_siegel_Z(g + 1e-9);
    EXPECT_LT(a * b, 0) << g;
  }
}

TEST(Turing, Examples) {
  auto tab = find_zeros(0, 130);
  EXPECT_EQ(turing_certify(tab, 100), 29);
  EXPECT_TRUE(tab.certified);
  EXPECT_EQ(turing_certify(tab, 14), 0);
  auto empty = find_zeros(0, 5);
  EXPECT_EQ(empty.size(), 0u);
  EXPECT_EQ(turing_certify(empty, 5), 0);
}

TEST(Turing, DetectsMissingZero) {
  auto tab = find_zeros(0, 200);
  tab.ordinates.erase(tab.ordinates.begin() + 20);
  tab.certified = false;
  tab.finalize();
  EXPECT_EQ(kind_of([&] { turing_certify(tab, 150); }), ErrorKind::certification_failure);
  EXPECT_FALSE(tab.certified);
}

TEST(Turing, NeedsHeadroom) {
  auto tab = find_zeros(0, 100);
  EXPECT_EQ(kind_of([&] { turing_certify(tab, 95); }), ErrorKind::out_of_coverage);
}

TEST(CountN, Examples) {
  auto tab = find_zeros(0, 100);
  EXPECT_EQ(count_N(tab, 0), 0);
  EXPECT_EQ(count_N(tab, 15), 1);
  EXPECT_EQ(count_N(tab, 100), 29);
  EXPECT_EQ(kind_of([&] { count_N(tab, 101); }), ErrorKind::out_of_coverage);
}

TEST(CountN, Multiplicity) {
  ZeroTable t;
  t.ordinates = {10, 20, 30};
  t.multiplicity = {1, 2, 1};
  t.t_max = 40;
  t.source = Source::synthetic;
  t.finalize();
  EXPECT_EQ(count_N(t, 25), 3);
  EXPECT_EQ(count_N(t, 40), 4);
  EXPECT_EQ(t.zero(2).index, 4);
}

TEST(SofT, Examples) {
  auto tab = find_zeros(0, 100);
  EXPECT_DOUBLE_EQ(s_of_t(tab, 2), -1 - riemann_siegel_theta(2) / kPi);
  double g1 = tab.ordinates[0];
  EXPECT_NEAR(s_of_t(tab, g1 + 1e-7) - s_of_t(tab, g1 - 1e-7), 1.0, 1e-6);
  // lower semicontinuous at the zero itself
  EXPECT_EQ(count_N(tab, g1), 0);
}

TEST(SofT, SmallOnGrid) {
  const auto& tab = table_20k();
  double worst = 0;
  for (int i = 1; i <= 20000; ++i) worst = std::max(worst, std::fabs(s_of_t(tab, i * 1.0)));
  EXPECT_LT(worst, 2.0);
}

TEST(SofT, OmegaIntegralIsTheta) {
  for (double T : {10.0, 100.0, 1000.0}) {
    double I = integrate([](double x) { return omega(x) / kTwoPi; }, 0, T, 1e-13, 1e-14);
    EXPECT_NEAR(I, riemann_siegel_theta(T) / kPi, 1e-8) << T;
  }
}

TEST(Invariants, PointwiseDensityBound) {
  const auto& tab = table_20k();
  double C = 0;
  for (int T = 0; T + 1 <= 20000; ++T)
    C = std::max(C, double(count_N(tab, T + 1) - count_N(tab, T)) / std::log(T + 2.0));
  EXPECT_LE(C, 2.0);
}

TEST(Parse, Examples) {
  std::istringstream a("14.134725\n21.022040\n");
  auto t = parse_zero_table(a, 0);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.source, Source::ingested);
  EXPECT_FALSE(t.certified);
  std::istringstream b("0.5\n1.25\n");
  auto u = parse_zero_table(b, 1e6);
  EXPECT_EQ(u.ordinates[0], 1e6 + 0.5);
  EXPECT_EQ(u.ordinates[1], 1e6 + 1.25);
  std::istringstream c("# header\n\n  14.1  \n\n# x\n21.0\n");
  EXPECT_EQ(parse_zero_table(c, 0).size(), 2u);
}

TEST(Parse, Errors) {
  auto msg = [](const std::string& text, double base, ErrorKind want) {
    std::istringstream in(text);
    try {
      parse_zero_table(in, base);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), want);
      return std::string(e.what());
    }
    ADD_FAILURE() << "no error for " << text;
    return std::string();
  };
  EXPECT_NE(msg("21.0\n14.1\n", 0, ErrorKind::monotonicity_error).find("line 2"), std::string::npos);
  EXPECT_NE(msg("1.0\n2.x\n", 0, ErrorKind::parse_error).find("line 2"), std::string::npos);
  EXPECT_NE(msg("# c\n\nabc\n", 0, ErrorKind::parse_error).find("line 3"), std::string::npos);
  msg("-3\n", 0, ErrorKind::negativity_error);
  msg("1\n1\n", 0, ErrorKind::monotonicity_error);
}

TEST(Parse, CountsAgreeWithComputed) {
  auto comp = find_zeros(0, 1000);
  std::ostringstream ss;
  char buf[64];
  for (double x : comp.ordinates) {
    std::snprintf(buf, sizeof buf, "%.17g\n", x);
    ss << buf;
  }
  std::istringstream in(ss.str());
  auto ing = parse_zero_table(in, 0);
  for (double T = 1; T < ing.t_max; T += 7.3) EXPECT_EQ(count_N(ing, T), count_N(comp, T)) << T;
}

TEST(Ztbl, RoundTripBitExact) {
  auto dir = tmpdir("ztbl");
  const auto& tab = table_20k();
  save_table(dir / "t.ztbl", tab);
  auto back = load_table(dir / "t.ztbl");
  ASSERT_EQ(back.size(), tab.size());
  EXPECT_EQ(std::memcmp(back.ordinates.data(), tab.ordinates.data(), 8 * tab.size()), 0);
  EXPECT_EQ(back.count_below, tab.count_below);
  EXPECT_TRUE(back.certified);
  // base offset
  std::istringstream in("0.123456789012\n0.5\n3.75\n");
  auto off = parse_zero_table(in, 1e6);
  auto bytes = ztbl::encode(off.base, off.ordinates);
  double base;
  auto dec = ztbl::decode(bytes, &base);
  EXPECT_EQ(base, 1e6);
  for (std::size_t i = 0; i < dec.size(); ++i) EXPECT_EQ(dec[i], off.ordinates[i]);
  fs::remove_all(dir);
}

TEST(Ztbl, Layout) {
  auto s = ztbl::encode(0.0, {14.5, 21.25});
  ASSERT_EQ(s.size(), 4u + 2 + 2 + 8 + 8 + 16 + 4);
  EXPECT_EQ(s.substr(0, 4), "ZTBL");
  EXPECT_EQ(ztbl::get_u(s, 4, 2), 1u);
  EXPECT_EQ(ztbl::get_u(s, 6, 2), 0u);
  EXPECT_EQ(ztbl::get_u(s, 16, 8), 2u);
  EXPECT_EQ(ztbl::get_f64(s, 24), 14.5);
  EXPECT_EQ(ztbl::get_u(s, s.size() - 4, 4), ztbl::crc(s, s.size() - 4));
}

TEST(Ztbl, TamperDetected) {
  auto s = ztbl::encode(0.0, {14.5, 21.25, 25.0});
  s[30] ^= 0x01;
  EXPECT_EQ(kind_of([&] { ztbl::decode(s); }), ErrorKind::checksum_mismatch);
  EXPECT_EQ(kind_of([&] { ztbl::decode("garbage"); }), ErrorKind::parse_error);
}

TEST(Ztbl, CachedFindZeros) {
  auto dir = tmpdir("cache");
  auto a = cached_find_zeros(100, 400, dir);
  auto b = cached_find_zeros(100, 400, dir);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a.count_below, b.count_below);
  EXPECT_TRUE(fs::exists(dir / "computed_100_400.ztbl.json"));
  fs::remove_all(dir);
}

TEST(Slice, KeepsCounts) {
  const auto& tab = table_20k();
  auto s = slice(tab, 5000, 6000);
  EXPECT_EQ(count_N(s, 5500), count_N(tab, 5500));
  EXPECT_EQ(kind_of([&] { count_N(s, 4000); }), ErrorKind::out_of_coverage);
}
