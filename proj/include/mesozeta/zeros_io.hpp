#pragma once

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>
#include <zlib.h>

#include "json.hpp"
#include "zeros.hpp"

namespace mesozeta {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- files

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// write-to-temp then rename, so readers never see a partial file
inline void write_file_atomic(const fs::path& p, const std::string& bytes) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp" + std::to_string(static_cast<unsigned long long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io_error, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::io_error, "short write on " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorKind::io_error, "rename to " + p.string() + " failed: " + ec.message());
  }
}

inline fs::path default_cache_dir() {
  if (const char* e = std::getenv("MESOZETA_CACHE_DIR"); e && *e) return fs::path(e);
  if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x) return fs::path(x) / "mesozeta";
  if (const char* h = std::getenv("HOME"); h && *h) return fs::path(h) / ".cache" / "mesozeta";
  return fs::temp_directory_path() / "mesozeta";
}

// ---------------------------------------------------------------- ZTBL

namespace ztbl {

inline constexpr unsigned char kMagic[4] = {0x5A, 0x54, 0x42, 0x4C};
inline constexpr std::uint16_t kVersion = 1;

inline void put_u16(std::string& s, std::uint16_t v) {
  for (int i = 0; i < 2; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f64(std::string& s, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(s, v);
}
inline std::uint64_t get_u(const std::string& s, std::size_t off, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[off + i])) << (8 * i);
  return v;
}
inline double get_f64(const std::string& s, std::size_t off) {
  std::uint64_t v = get_u(s, off, 8);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}
inline std::uint32_t crc(const std::string& s, std::size_t n) {
  return static_cast<std::uint32_t>(::crc32(0L, reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(n)));
}

// offsets are x - base; exact when x and base are within a factor 2 (Sterbenz)
// or base = 0. Anything else is refused rather than silently perturbed.
inline std::string encode(double base, const std::vector<double>& ordinates) {
  std::string s(reinterpret_cast<const char*>(kMagic), 4);
  put_u16(s, kVersion);
  put_u16(s, 0);
  put_f64(s, base);
  put_u64(s, ordinates.size());
  for (double x : ordinates) {
    double d = x - base;
    if (base + d != x) throw Error(ErrorKind::io_error, "ordinate not exactly representable as offset from base");
    put_f64(s, d);
  }
  put_u32(s, crc(s, s.size()));
  return s;
}

inline std::vector<double> decode(const std::string& s, double* base_out = nullptr) {
  if (s.size() < 28 || std::memcmp(s.data(), kMagic, 4) != 0) throw Error(ErrorKind::parse_error, "not a ZTBL file");
  std::uint32_t want = static_cast<std::uint32_t>(get_u(s, s.size() - 4, 4));
  if (crc(s, s.size() - 4) != want) throw Error(ErrorKind::checksum_mismatch, "ZTBL CRC32 mismatch");
  if (get_u(s, 4, 2) != kVersion) throw Error(ErrorKind::parse_error, "unsupported ZTBL version");
  if (get_u(s, 6, 2) != 0) throw Error(ErrorKind::parse_error, "unsupported ZTBL flags");
  double base = get_f64(s, 8);
  std::uint64_t n = get_u(s, 16, 8);
  if (s.size() != 24 + 8 * n + 4) throw Error(ErrorKind::parse_error, "ZTBL length does not match count");
  std::vector<double> out(n);
  for (std::uint64_t i = 0; i < n; ++i) out[i] = base + get_f64(s, 24 + 8 * i);
  if (base_out) *base_out = base;
  return out;
}

}  // namespace ztbl

// table + JSON sidecar (coverage, N(t_min), certification)
inline void save_table(const fs::path& path, const ZeroTable& tab) {
  if (tab.has_off_axis()) throw Error(ErrorKind::io_error, "ZTBL stores on-axis ordinates only");
  nlohmann::json meta = {{"t_min", tab.t_min},           {"t_max", tab.t_max},
                         {"count_below", tab.count_below}, {"certified", tab.certified},
                         {"source", source_name(tab.source)}, {"count", tab.size()}};
  write_file_atomic(path, ztbl::encode(tab.base, tab.ordinates));
  fs::path side = path;
  side += ".json";
  write_file_atomic(side, meta.dump(2) + "\n");
}

inline ZeroTable load_table(const fs::path& path) {
  ZeroTable tab;
  tab.ordinates = ztbl::decode(read_file(path), &tab.base);
  fs::path side = path;
  side += ".json";
  if (fs::exists(side)) {
    auto meta = nlohmann::json::parse(read_file(side));
    tab.t_min = meta.at("t_min").get<double>();
    tab.t_max = meta.at("t_max").get<double>();
    tab.count_below = meta.at("count_below").get<std::int64_t>();
    tab.certified = meta.at("certified").get<bool>();
    std::string src = meta.value("source", "ingested");
    tab.source = src == "computed" ? Source::computed : src == "synthetic" ? Source::synthetic : Source::ingested;
  } else {
    tab.source = Source::ingested;
    tab.t_min = tab.base == 0 ? 0 : (tab.ordinates.empty() ? 0 : tab.ordinates.front());
    tab.t_max = tab.ordinates.empty() ? 0 : tab.ordinates.back();
  }
  tab.finalize();
  return tab;
}

inline std::string fmt_height(double t) {
  std::ostringstream ss;
  ss.precision(17);
  ss << t;
  return ss.str();
}

// find_zeros with a disk cache keyed on the interval
inline ZeroTable cached_find_zeros(double t_min, double t_max, const fs::path& cache_dir,
                                   const EvaluationPrecision& prec = {}, FindOptions opt = {}) {
  fs::path p = cache_dir / ("computed_" + fmt_height(t_min) + "_" + fmt_height(t_max) + ".ztbl");
  if (fs::exists(p)) {
    try {
      ZeroTable t = load_table(p);
      if (t.certified && t.t_min == t_min && t.t_max == t_max) return t;
    } catch (const Error&) {
      // corrupt cache entry; recompute below
    }
  }
  ZeroTable t = find_zeros(t_min, t_max, prec, opt);
  save_table(p, t);
  return t;
}

}  // namespace mesozeta
