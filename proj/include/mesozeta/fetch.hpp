#pragma once

// Remote zero tables. Needs OpenSSL (digests, https) and the vendored httplib.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"
// <resolv.h> defines _res, which Eigen uses as a parameter name
#ifdef _res
#undef _res
#endif

#include <openssl/evp.h>

#include <cctype>
#include <map>
#include <sstream>
#include <string>

#include "zeros_io.hpp"

namespace mesozeta {

struct SourceEntry {
  std::string url;
  std::string sha256;  // lowercase hex; empty = record on first download
  double base = 0;
};
using SourceRegistry = std::map<std::string, SourceEntry>;

inline SourceRegistry default_registry() {
  // first 100k zeros, accurate to 3e-9
  return {{"odlyzko_zeros1", {"https://www-users.cse.umn.edu/~odlyzko/zeta_tables/zeros1", "", 0.0}}};
}

// "URL [sha256=HEX] [base=X]"
inline SourceEntry parse_source_entry(const std::string& key, const std::string& value) {
  std::istringstream ss(value);
  SourceEntry e;
  std::string tok;
  if (!(ss >> e.url)) throw Error(ErrorKind::type_error, "source '" + key + "' has no URL");
  while (ss >> tok) {
    if (tok.rfind("sha256=", 0) == 0) {
      e.sha256 = tok.substr(7);
      for (auto& c : e.sha256) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (e.sha256.size() != 64 || e.sha256.find_first_not_of("0123456789abcdef") != std::string::npos)
        throw Error(ErrorKind::type_error, "source '" + key + "': malformed sha256");
    } else if (tok.rfind("base=", 0) == 0) {
      try {
        e.base = std::stod(tok.substr(5));
      } catch (...) {
        throw Error(ErrorKind::type_error, "source '" + key + "': malformed base");
      }
    } else {
      throw Error(ErrorKind::type_error, "source '" + key + "': unexpected token '" + tok + "'");
    }
  }
  return e;
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::io_error, "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

inline std::string http_get(const std::string& url) {
  if (const char* off = std::getenv("MESOZETA_OFFLINE"); off && *off && std::string(off) != "0")
    throw Error(ErrorKind::network_error, "network disabled (MESOZETA_OFFLINE)");
  auto p = url.find("://");
  if (p == std::string::npos) throw Error(ErrorKind::network_error, "bad URL " + url);
  auto slash = url.find('/', p + 3);
  std::string host = url.substr(0, slash), path = slash == std::string::npos ? "/" : url.substr(slash);
  httplib::Client cli(host);
  if (!cli.is_valid()) throw Error(ErrorKind::network_error, "cannot create client for " + host);
  cli.set_follow_location(true);
  cli.set_connection_timeout(15);
  cli.set_read_timeout(120);
  auto res = cli.Get(path);
  if (!res) throw Error(ErrorKind::network_error, "GET " + url + ": " + httplib::to_string(res.error()));
  if (res->status != 200) throw Error(ErrorKind::network_error, "GET " + url + ": HTTP " + std::to_string(res->status));
  return res->body;
}

struct CachePaths {
  fs::path raw, digest, table;
};
inline CachePaths cache_paths(const std::string& id, const fs::path& dir) {
  return {dir / (id + ".raw"), dir / (id + ".sha256"), dir / (id + ".ztbl")};
}

inline std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

// Checks the cached raw bytes against the registry digest (or the digest
// recorded at first download) and the binary table's CRC.
inline void verify_cache(const std::string& id, const fs::path& dir, const SourceRegistry& reg) {
  auto it = reg.find(id);
  if (it == reg.end()) throw Error(ErrorKind::unknown_source, "no source '" + id + "' in registry");
  auto cp = cache_paths(id, dir);
  if (!fs::exists(cp.raw)) throw Error(ErrorKind::io_error, "no cached copy of '" + id + "' in " + dir.string());
  std::string want = it->second.sha256;
  if (want.empty() && fs::exists(cp.digest)) want = trim(read_file(cp.digest));
  std::string got = sha256_hex(read_file(cp.raw));
  if (!want.empty() && got != want)
    throw Error(ErrorKind::checksum_mismatch, "cached '" + id + "' has sha256 " + got + ", expected " + want);
  if (fs::exists(cp.table)) ztbl::decode(read_file(cp.table));
}

inline ZeroTable fetch_zero_table(const std::string& id, const fs::path& dir, const SourceRegistry& reg = default_registry()) {
  auto it = reg.find(id);
  if (it == reg.end()) throw Error(ErrorKind::unknown_source, "no source '" + id + "' in registry");
  const SourceEntry& src = it->second;
  auto cp = cache_paths(id, dir);
  if (fs::exists(cp.raw)) {
    verify_cache(id, dir, reg);
    if (fs::exists(cp.table)) return load_table(cp.table);
    std::istringstream in(read_file(cp.raw));
    ZeroTable tab = parse_zero_table(in, src.base);
    save_table(cp.table, tab);
    return tab;
  }
  std::string body = http_get(src.url);
  std::string got = sha256_hex(body);
  if (!src.sha256.empty() && got != src.sha256)
    throw Error(ErrorKind::checksum_mismatch, "download of '" + id + "' has sha256 " + got + ", expected " + src.sha256);
  std::istringstream in(body);
  ZeroTable tab = parse_zero_table(in, src.base);  // parse before caching anything
  write_file_atomic(cp.raw, body);
  write_file_atomic(cp.digest, got + "\n");
  save_table(cp.table, tab);
  return load_table(cp.table);
}

}  // namespace mesozeta
