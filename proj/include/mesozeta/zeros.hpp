#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "parallel.hpp"
#include "specialfn.hpp"

namespace mesozeta {

enum class Source { computed, ingested, synthetic };

inline const char* source_name(Source s) {
  switch (s) {
    case Source::computed: return "computed";
    case Source::ingested: return "ingested";
    case Source::synthetic: return "synthetic";
  }
  return "?";
}

struct Zero {
  std::int64_t index;  // 1-based rank, multiplicity expanded
  double ordinate;
  double off_axis;
  int multiplicity;
};

// Sorted positive ordinates. off_axis and multiplicity are either empty
// (all 0 / all 1) or parallel to ordinates. count_below is N(t_min).
struct ZeroTable {
  std::vector<double> ordinates;
  std::vector<double> off_axis;
  std::vector<int> multiplicity;
  double t_min = 0, t_max = 0;
  double base = 0;        // offset used by the text/binary formats
  double ref_height = 0;  // T in beta = 1/2 + A/log T; 0 means "use t_max"
  Source source = Source::computed;
  bool certified = false;
  std::int64_t count_below = 0;
  std::vector<std::int64_t> cum;  // cum[i] = multiplicity of zeros [0, i)

  std::size_t size() const { return ordinates.size(); }
  int mult(std::size_t i) const { return multiplicity.empty() ? 1 : multiplicity[i]; }
  double A(std::size_t i) const { return off_axis.empty() ? 0.0 : off_axis[i]; }
  bool has_off_axis() const {
    for (double a : off_axis)
      if (a != 0) return true;
    return false;
  }
  double reference_height() const { return ref_height > 0 ? ref_height : t_max; }

  void finalize() {
    for (std::size_t i = 1; i < ordinates.size(); ++i)
      if (!(ordinates[i] > ordinates[i - 1]))
        throw Error(ErrorKind::monotonicity_error, "ordinates not strictly increasing at index " + std::to_string(i));
    if (!off_axis.empty() && off_axis.size() != ordinates.size())
      throw Error(ErrorKind::range_error, "off_axis size mismatch");
    if (!multiplicity.empty() && multiplicity.size() != ordinates.size())
      throw Error(ErrorKind::range_error, "multiplicity size mismatch");
    cum.assign(ordinates.size() + 1, 0);
    for (std::size_t i = 0; i < ordinates.size(); ++i) {
      if (mult(i) < 1) throw Error(ErrorKind::range_error, "multiplicity < 1");
      cum[i + 1] = cum[i] + mult(i);
    }
  }

  // first index with ordinate >= T
  std::size_t lower(double T) const {
    return static_cast<std::size_t>(std::lower_bound(ordinates.begin(), ordinates.end(), T) - ordinates.begin());
  }
  // multiplicity-weighted number of stored zeros with ordinate < T
  std::int64_t stored_below(double T) const {
    std::size_t i = lower(T);
    return cum.empty() ? static_cast<std::int64_t>(i) : cum[i];
  }
  Zero zero(std::size_t i) const {
    std::int64_t before = cum.empty() ? static_cast<std::int64_t>(i) : cum[i];
    return Zero{count_below + before + 1, ordinates[i], A(i), mult(i)};
  }
};

// ---------------------------------------------------------------- counting

inline void check_coverage(const ZeroTable& tab, double lo, double hi, const char* what) {
  const double slack = 1e-9 * std::max(1.0, std::fabs(hi));
  if (hi > tab.t_max + slack || (tab.t_min > 0 && lo < tab.t_min - slack))
    throw Error(ErrorKind::out_of_coverage, std::string(what) + ": [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                                "] outside table coverage [" + std::to_string(tab.t_min) + ", " +
                                                std::to_string(tab.t_max) + "]");
}

// N(T) = #{0 < gamma < T}, with multiplicity
inline std::int64_t count_N(const ZeroTable& tab, double T) {
  if (T <= 0) return 0;
  check_coverage(tab, T, T, "count_N");
  return tab.count_below + tab.stored_below(T);
}

inline double s_of_t(const ZeroTable& tab, double T) {
  return static_cast<double>(count_N(tab, T)) - riemann_siegel_theta(T) / kPi - 1.0;
}

// sub-table on [lo, hi] of a table that covers it
inline ZeroTable slice(const ZeroTable& tab, double lo, double hi) {
  check_coverage(tab, lo, hi, "slice");
  ZeroTable out;
  std::size_t i0 = tab.lower(lo), i1 = tab.lower(std::nextafter(hi, INFINITY));
  out.ordinates.assign(tab.ordinates.begin() + i0, tab.ordinates.begin() + i1);
  if (!tab.off_axis.empty()) out.off_axis.assign(tab.off_axis.begin() + i0, tab.off_axis.begin() + i1);
  if (!tab.multiplicity.empty()) out.multiplicity.assign(tab.multiplicity.begin() + i0, tab.multiplicity.begin() + i1);
  out.t_min = lo;
  out.t_max = hi;
  out.base = tab.base;
  out.ref_height = tab.ref_height;
  out.source = tab.source;
  out.certified = tab.certified;
  out.count_below = tab.count_below + tab.stored_below(lo);
  out.finalize();
  return out;
}

// ---------------------------------------------------------------- zero finding

namespace detail {

inline int turing_blocks_needed(double t) {
  double l = std::log(std::max(t, 10.0));
  return std::max(2, static_cast<int>(std::ceil(0.0061 * l * l + 0.08 * l)));
}

// root of f in [a,b] with f(a) f(b) < 0; Brent's method, final bracket <= xtol
template <class F>
double brent_root(F&& f, double a, double b, double fa, double fb, double xtol) {
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < 200; ++it) {
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    double ulp = std::nextafter(std::fabs(b), INFINITY) - std::fabs(b);
    double tol1 = std::max(0.25 * xtol, ulp);
    double xm = 0.5 * (c - b);
    if (std::fabs(c - b) <= xtol || std::fabs(xm) <= tol1 || fb == 0) return fb == 0 ? b : 0.5 * (b + c);
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double s = fb / fa, p, q;
      if (a == c) {
        p = 2 * xm * s;
        q = 1 - s;
      } else {
        double qq = fa / fc, r = fb / fc;
        p = s * (2 * xm * qq * (qq - r) - (b - a) * (r - 1));
        q = (qq - 1) * (r - 1) * (s - 1);
      }
      if (p > 0) q = -q;
      p = std::fabs(p);
      if (2 * p < std::min(3 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::fabs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
  }
  return 0.5 * (b + c);
}

struct BlockResult {
  std::vector<double> zeros;
  bool rosser_ok = false;
};

inline BlockResult process_block(const std::vector<double>& g, const std::vector<double>& zg, std::size_t j,
                                 std::size_t k, const EvaluationPrecision& prec, double xtol) {
  const std::size_t m = k - j;
  std::vector<double> xs(g.begin() + j, g.begin() + k + 1), zs(zg.begin() + j, zg.begin() + k + 1);
  auto changes = [&] {
    std::size_t c = 0;
    for (std::size_t i = 0; i + 1 < zs.size(); ++i)
      if ((zs[i] > 0) != (zs[i + 1] > 0)) ++c;
    return c;
  };
  // adaptive subdivision: 2, 4, ..., 64 subpoints per Gram interval
  for (int sub = 2; changes() < m && sub <= 64; sub *= 2) {
    std::vector<double> nx, nz;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      nx.push_back(xs[i]);
      nz.push_back(zs[i]);
      double x = 0.5 * (xs[i] + xs[i + 1]);
      nx.push_back(x);
      nz.push_back(riemann_siegel_Z(x, prec));
    }
    nx.push_back(xs.back());
    nz.push_back(zs.back());
    xs.swap(nx);
    zs.swap(nz);
  }
  BlockResult r;
  r.rosser_ok = changes() >= m;
  auto Zf = [&](double x) { return riemann_siegel_Z(x, prec); };
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    if ((zs[i] > 0) != (zs[i + 1] > 0)) r.zeros.push_back(brent_root(Zf, xs[i], xs[i + 1], zs[i], zs[i + 1], xtol));
  return r;
}

}  // namespace detail

struct FindOptions {
  int jobs = 1;
  double xtol = 1e-9;
};

inline ZeroTable find_zeros(double t_min, double t_max, const EvaluationPrecision& prec = {}, FindOptions opt = {}) {
  prec.validate();
  if (!(t_min >= 0) || !(t_max >= t_min) || t_max > 1e8)
    throw Error(ErrorKind::range_error, "find_zeros needs 0 <= t_min <= t_max <= 1e8");
  ZeroTable tab;
  tab.t_min = t_min;
  tab.t_max = t_max;
  tab.source = Source::computed;
  if (t_max == t_min) {
    tab.certified = true;
    tab.count_below = 0;
    if (t_min > gram_point(-1)) {
      // an empty interval still needs N(t_min) for consistent counting
      ZeroTable probe = find_zeros(t_min, t_min + 1e-6, prec, opt);
      tab.count_below = probe.count_below;
    }
    tab.finalize();
    return tab;
  }

  const int K = detail::turing_blocks_needed(t_max + 100);
  const long long margin = 6LL * K + 24;
  long long a0 = static_cast<long long>(std::floor(riemann_siegel_theta(t_min) / kPi)) - margin;
  const bool origin = a0 <= margin;
  if (origin) a0 = -1;
  long long b0 = static_cast<long long>(std::ceil(riemann_siegel_theta(t_max) / kPi)) + margin;
  const std::size_t ng = static_cast<std::size_t>(b0 - a0 + 1);

  std::vector<double> g(ng), zg(ng);
  const std::size_t chunk = 4096;
  parallel_for((ng + chunk - 1) / chunk, opt.jobs, [&](std::size_t c) {
    for (std::size_t i = c * chunk; i < std::min(ng, (c + 1) * chunk); ++i) {
      g[i] = gram_point(a0 + static_cast<long long>(i));
      zg[i] = riemann_siegel_Z(g[i], prec);
    }
  });
  auto good = [&](std::size_t i) {
    long long n = a0 + static_cast<long long>(i);
    return (n % 2 == 0) ? zg[i] > 0 : zg[i] < 0;
  };
  std::vector<std::size_t> bounds;
  for (std::size_t i = 0; i < ng; ++i)
    if (good(i)) bounds.push_back(i);
  if (bounds.size() < 2) throw Error(ErrorKind::certification_failure, "no Gram blocks in range");
  const std::size_t nb = bounds.size() - 1;
  std::vector<detail::BlockResult> res(nb);
  parallel_for((nb + 63) / 64, opt.jobs, [&](std::size_t c) {
    for (std::size_t b = c * 64; b < std::min(nb, (c + 1) * 64); ++b)
      res[b] = detail::process_block(g, zg, bounds[b], bounds[b + 1], prec, opt.xtol);
  });

  // K consecutive Rosser blocks after / before a block boundary
  auto ok_after = [&](std::size_t bi) {
    if (bi + K > nb) return false;
    for (std::size_t q = bi; q < bi + K; ++q)
      if (!res[q].rosser_ok) return false;
    return true;
  };
  auto ok_before = [&](std::size_t bi) {
    if (bi < static_cast<std::size_t>(K)) return false;
    for (std::size_t q = bi - K; q < bi; ++q)
      if (!res[q].rosser_ok) return false;
    return true;
  };

  // lower anchor: N(g_a) = a + 1
  std::size_t lo_bi = 0;
  bool lo_found = false;
  if (origin && bounds[0] == 0 && ok_after(0)) {
    lo_found = true;  // N(g_{-1}) <= 0
  } else {
    for (std::size_t bi = nb + 1; bi-- > 0;) {
      if (g[bounds[bi]] > t_min) continue;
      if (ok_before(bi) && ok_after(bi)) {
        lo_bi = bi;
        lo_found = true;
        break;
      }
    }
  }
  std::size_t hi_bi = 0;
  bool hi_found = false;
  for (std::size_t bi = 0; bi <= nb; ++bi) {
    if (g[bounds[bi]] < t_max) continue;
    if (ok_after(bi)) {
      hi_bi = bi;
      hi_found = true;
      break;
    }
  }
  if (!lo_found || !hi_found) throw Error(ErrorKind::certification_failure, "not enough Rosser blocks to apply Turing's method");

  std::vector<double> all;
  for (std::size_t b = lo_bi; b < hi_bi; ++b) all.insert(all.end(), res[b].zeros.begin(), res[b].zeros.end());
  const long long na = a0 + static_cast<long long>(bounds[lo_bi]);
  const long long nbnd = a0 + static_cast<long long>(bounds[hi_bi]);
  const long long expected = nbnd - na;
  if (static_cast<long long>(all.size()) != expected)
    throw Error(ErrorKind::missed_zero, "found " + std::to_string(all.size()) + " zeros between Gram points g_" +
                                            std::to_string(na) + " and g_" + std::to_string(nbnd) + ", Turing bound says " +
                                            std::to_string(expected));
  for (std::size_t i = 1; i < all.size(); ++i)
    if (!(all[i] > all[i - 1])) throw Error(ErrorKind::missed_zero, "zero ordinates collided during refinement");

  auto first = std::lower_bound(all.begin(), all.end(), t_min);
  auto last = std::upper_bound(all.begin(), all.end(), t_max);
  tab.count_below = (na + 1) + (first - all.begin());
  tab.ordinates.assign(first, last);
  tab.certified = true;
  tab.finalize();
  return tab;
}

// Turing/Brent upper bound at a Gram point above T, combined with the table's
// own zeros. Returns N(T) and marks the table certified.
inline std::int64_t turing_certify(ZeroTable& tab, double T, const EvaluationPrecision& prec = {}) {
  const double g_first = gram_point(-1);
  if (T <= g_first) return 0;  // N(g_{-1}) = 0
  if (T > tab.t_max - 20)
    throw Error(ErrorKind::out_of_coverage, "turing_certify needs T <= t_max - 20");
  if (tab.t_min > 0 && T < tab.t_min) throw Error(ErrorKind::out_of_coverage, "T below table start");
  const int K = detail::turing_blocks_needed(tab.t_max);
  long long n = static_cast<long long>(std::ceil(riemann_siegel_theta(T) / kPi));
  if (n < -1) n = -1;
  // walk Gram points upward, building blocks from Z signs
  std::vector<long long> idx;
  std::vector<double> gp;
  auto good = [&](long long m, double x) {
    double z = riemann_siegel_Z(x, prec);
    return (m % 2 == 0) ? z > 0 : z < 0;
  };
  long long m = n;
  double x = gram_point(m);
  while (!good(m, x)) {
    x = gram_point(++m);
    if (x > tab.t_max) throw Error(ErrorKind::certification_failure, "no good Gram point below t_max");
  }
  for (long long start = m;;) {
    // try boundary `start`: K Rosser blocks after it, counted with table zeros
    long long cur = start;
    double gcur = gram_point(cur);
    int okblocks = 0;
    bool fail = false;
    while (okblocks < K) {
      long long nxt = cur + 1;
      double gn = gram_point(nxt);
      while (!good(nxt, gn)) {
        gn = gram_point(++nxt);
        if (gn > tab.t_max) break;
      }
      if (gn > tab.t_max) {
        fail = true;
        break;
      }
      std::int64_t inside = tab.stored_below(gn) - tab.stored_below(gcur);
      if (inside < nxt - cur) {
        fail = true;
        break;
      }
      ++okblocks;
      cur = nxt;
      gcur = gn;
    }
    double gs = gram_point(start);
    if (!fail) {
      std::int64_t F = tab.count_below + tab.stored_below(gs);
      if (F != start + 1)
        throw Error(ErrorKind::certification_failure, "table holds " + std::to_string(F) + " zeros below g_" +
                                                          std::to_string(start) + ", Turing bound allows " +
                                                          std::to_string(start + 1));
      tab.certified = true;
      return tab.count_below + tab.stored_below(T);
    }
    // move to the next good Gram point
    long long nx = start + 1;
    double gx = gram_point(nx);
    while (!good(nx, gx)) {
      gx = gram_point(++nx);
      if (gx > tab.t_max) throw Error(ErrorKind::certification_failure, "Turing's method could not pin N(T)");
    }
    start = nx;
  }
}

// ---------------------------------------------------------------- text tables

inline ZeroTable parse_zero_table(std::istream& in, double base) {
  ZeroTable tab;
  tab.source = Source::ingested;
  tab.base = base;
  std::string line;
  long lineno = 0;
  double prev = -INFINITY;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    std::size_t e = line.find_last_not_of(" \t\r");
    const char* p0 = line.data() + b;
    const char* p1 = line.data() + e + 1;
    double v;
    auto [ptr, ec] = std::from_chars(p0, p1, v);
    if (ec != std::errc() || ptr != p1 || !std::isfinite(v))
      throw Error(ErrorKind::parse_error, "line " + std::to_string(lineno) + ": malformed decimal '" +
                                              line.substr(b, e - b + 1) + "'");
    double x = base + v;
    if (x < 0) throw Error(ErrorKind::negativity_error, "line " + std::to_string(lineno) + ": negative ordinate");
    if (!(x > prev))
      throw Error(ErrorKind::monotonicity_error, "line " + std::to_string(lineno) + ": ordinates not increasing");
    prev = x;
    tab.ordinates.push_back(x);
  }
  tab.t_min = (base == 0 || tab.ordinates.empty()) ? 0.0 : tab.ordinates.front();
  tab.t_max = tab.ordinates.empty() ? 0.0 : tab.ordinates.back();
  tab.certified = false;
  tab.finalize();
  return tab;
}

// zeros at +gamma and -gamma with ordinate in (lo, hi), for the symmetric sums
template <class F>
void for_each_signed_zero(const ZeroTable& tab, double lo, double hi, F&& f) {
  if (hi > 0) {
    for (std::size_t i = tab.lower(std::max(lo, 0.0)); i < tab.size() && tab.ordinates[i] < hi; ++i)
      f(tab.ordinates[i], tab.A(i), tab.mult(i));
  }
  if (lo < 0) {
    for (std::size_t i = tab.lower(std::max(-hi, 0.0)); i < tab.size() && tab.ordinates[i] < -lo; ++i)
      f(-tab.ordinates[i], tab.A(i), tab.mult(i));
  }
}

}  // namespace mesozeta
