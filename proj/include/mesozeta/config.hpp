#pragma once

// Flat key = value configuration with [sections], '#' comments and typed,
// per-command schemas. Command-line overrides go through the same parser.
//
//   file    := line*
//   line    := ws (section | pair)? ws comment? '\n'
//   section := '[' name ']'
//   pair    := key ws '=' ws value
//   comment := '#' ...        (at line start or after whitespace)
//
// Keys before the first section are global (seed, jobs, out, cache_dir).
// [sources] maps an identifier to "URL [sha256=HEX] [base=X]".

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "json.hpp"

namespace mesozeta {

class ConfigError : public Error {
 public:
  ConfigError(ErrorKind k, std::string key, const std::string& msg) : Error(k, msg), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class ValueType { real, integer, u64, boolean, string, real_list, int_list };

inline const char* type_name(ValueType t) {
  switch (t) {
    case ValueType::real: return "real";
    case ValueType::integer: return "integer";
    case ValueType::u64: return "unsigned 64-bit integer";
    case ValueType::boolean: return "boolean";
    case ValueType::string: return "string";
    case ValueType::real_list: return "comma-separated reals";
    case ValueType::int_list: return "comma-separated integers";
  }
  return "value";
}

struct Value {
  ValueType type = ValueType::string;
  double real = 0;
  long long integer = 0;
  std::uint64_t u64 = 0;
  bool boolean = false;
  std::string text;
  std::vector<double> reals;
  std::vector<long long> ints;

  nlohmann::ordered_json to_json() const {
    switch (type) {
      case ValueType::real: return real;
      case ValueType::integer: return integer;
      case ValueType::u64: return u64;
      case ValueType::boolean: return boolean;
      case ValueType::string: return text;
      case ValueType::real_list: return reals;
      case ValueType::int_list: return ints;
    }
    return nullptr;
  }
};

namespace cfgdetail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* b = s.data();
  if (*b == '+') ++b;
  auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(v);
}

inline bool parse_integer(const std::string& s, long long& v) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && p == s.data() + s.size()) return true;
  // 2e4 and the like, when exactly integral
  double d;
  if (parse_double(s, d) && d == std::floor(d) && std::fabs(d) < 9.0e15) {
    v = static_cast<long long>(d);
    return true;
  }
  return false;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  return out;
}

inline bool valid_key(const std::string& k) {
  if (k.empty() || !(std::isalpha(static_cast<unsigned char>(k[0])) || k[0] == '_')) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

}  // namespace cfgdetail

inline Value parse_value(const std::string& key, ValueType type, const std::string& raw) {
  using namespace cfgdetail;
  Value v;
  v.type = type;
  std::string s = trim(raw);
  auto bad = [&]() -> Value {
    throw ConfigError(ErrorKind::type_error, key, key + ": expected " + type_name(type) + ", got '" + s + "'");
  };
  switch (type) {
    case ValueType::real:
      if (!parse_double(s, v.real)) bad();
      break;
    case ValueType::integer:
      if (!parse_integer(s, v.integer)) bad();
      break;
    case ValueType::u64: {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v.u64);
      if (s.empty() || ec != std::errc() || p != s.data() + s.size()) bad();
      break;
    }
    case ValueType::boolean:
      if (s == "true" || s == "1" || s == "yes") v.boolean = true;
      else if (s == "false" || s == "0" || s == "no") v.boolean = false;
      else bad();
      break;
    case ValueType::string:
      if (s.empty()) bad();
      v.text = s;
      break;
    case ValueType::real_list:
      for (auto& item : split_list(s)) {
        double d;
        if (!parse_double(item, d)) bad();
        v.reals.push_back(d);
      }
      if (v.reals.empty()) bad();
      break;
    case ValueType::int_list:
      for (auto& item : split_list(s)) {
        long long d;
        if (!parse_integer(item, d)) bad();
        v.ints.push_back(d);
      }
      if (v.ints.empty()) bad();
      break;
  }
  return v;
}

struct KeySpec {
  std::string name;
  ValueType type;
  std::optional<std::string> default_value;  // empty: required
  std::string help;
  // returns an error message when the value is out of range
  std::function<std::optional<std::string>(const Value&)> check = {};
};

struct CommandSchema {
  std::string name;
  std::string help;
  std::vector<KeySpec> keys;
  const KeySpec* find(const std::string& k) const {
    for (auto& s : keys)
      if (s.name == k) return &s;
    return nullptr;
  }
};

// range helpers; lists are checked element by element
using RangeCheck = std::function<std::optional<std::string>(const Value&)>;

inline RangeCheck numeric_check(std::function<bool(double)> ok, std::string msg) {
  return [ok, msg](const Value& v) -> std::optional<std::string> {
    bool good = true;
    if (v.type == ValueType::real) good = ok(v.real);
    if (v.type == ValueType::integer) good = ok(double(v.integer));
    for (double x : v.reals) good = good && ok(x);
    for (long long x : v.ints) good = good && ok(double(x));
    if (good) return std::nullopt;
    return msg;
  };
}
inline std::string fmt_bound(double x) {
  std::ostringstream m;
  m << x;
  return m.str();
}
inline RangeCheck at_least(double lo) {
  return numeric_check([lo](double x) { return x >= lo; }, "must be >= " + fmt_bound(lo));
}
inline RangeCheck within(double lo, double hi) {
  return numeric_check([lo, hi](double x) { return x >= lo && x <= hi; },
                       "must lie in [" + fmt_bound(lo) + ", " + fmt_bound(hi) + "]");
}
inline RangeCheck open_interval(double lo, double hi) {
  return numeric_check([lo, hi](double x) { return x > lo && x < hi; },
                       "must lie in (" + fmt_bound(lo) + ", " + fmt_bound(hi) + ")");
}
inline RangeCheck one_of(std::vector<std::string> opts) {
  return [opts](const Value& v) -> std::optional<std::string> {
    for (auto& o : opts)
      if (v.text == o) return std::nullopt;
    std::string m = "must be one of";
    for (auto& o : opts) m += " " + o;
    return m;
  };
}

struct RawEntry {
  std::string value;
  int line;
};

// section -> ordered (key, entry); "" holds the globals
struct RawConfig {
  std::map<std::string, std::vector<std::pair<std::string, RawEntry>>> sections;
};

inline RawConfig parse_config_text(const std::string& text) {
  using namespace cfgdetail;
  RawConfig rc;
  rc.sections[""];
  std::string section;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    // comments: '#' at start or after whitespace, so URL fragments survive
    for (std::size_t i = 0; i < line.size(); ++i)
      if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    std::string s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError(ErrorKind::parse_error, "", "config line " + std::to_string(no) + ": unterminated section");
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_key(section) && section.find('-') == std::string::npos)
        throw ConfigError(ErrorKind::parse_error, "", "config line " + std::to_string(no) + ": bad section name");
      rc.sections[section];
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(ErrorKind::parse_error, "", "config line " + std::to_string(no) + ": expected key = value");
    std::string k = trim(s.substr(0, eq)), v = trim(s.substr(eq + 1));
    if (!valid_key(k))
      throw ConfigError(ErrorKind::parse_error, k, "config line " + std::to_string(no) + ": bad key '" + k + "'");
    auto& sec = rc.sections[section];
    for (auto& [ek, ev] : sec)
      if (ek == k)
        throw ConfigError(ErrorKind::parse_error, k,
                          k + ": duplicate at config line " + std::to_string(no) + " (first at " +
                              std::to_string(ev.line) + ")");
    sec.push_back({k, {v, no}});
  }
  return rc;
}

struct ResolvedConfig {
  std::string command;
  std::vector<std::pair<std::string, Value>> values;  // schema order
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
  std::string cache_dir;
  std::map<std::string, std::string> sources;

  const Value& at(const std::string& k) const {
    for (auto& [n, v] : values)
      if (n == k) return v;
    throw ConfigError(ErrorKind::missing_key, k, k + ": not resolved");
  }
  double real(const std::string& k) const { return at(k).real; }
  long long integer(const std::string& k) const { return at(k).integer; }
  const std::string& text(const std::string& k) const { return at(k).text; }
  bool boolean(const std::string& k) const { return at(k).boolean; }

  // jobs and paths are left out: they never change results
  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["seed"] = seed;
    nlohmann::ordered_json p = nlohmann::ordered_json::object();
    for (auto& [k, v] : values) p[k] = v.to_json();
    j["parameters"] = p;
    return j;
  }
};

inline const std::vector<std::string>& global_keys() {
  static const std::vector<std::string> g{"seed", "jobs", "out", "cache_dir"};
  return g;
}

// file values first, then flag overrides; every section and key is checked
// against the schemas even when it belongs to another command
inline ResolvedConfig resolve_config(const std::vector<CommandSchema>& schemas, const std::string& command,
                                     const RawConfig& file,
                                     const std::vector<std::pair<std::string, std::string>>& overrides,
                                     const std::map<std::string, std::string>& global_overrides) {
  const CommandSchema* cmd = nullptr;
  for (auto& s : schemas)
    if (s.name == command) cmd = &s;
  if (!cmd) throw ConfigError(ErrorKind::unknown_key, command, "unknown command '" + command + "'");

  for (auto& [sec, entries] : file.sections) {
    if (sec.empty()) {
      for (auto& [k, e] : entries)
        if (std::find(global_keys().begin(), global_keys().end(), k) == global_keys().end())
          throw ConfigError(ErrorKind::unknown_key, k,
                            k + ": unknown global key (config line " + std::to_string(e.line) + ")");
      continue;
    }
    if (sec == "sources") continue;
    const CommandSchema* other = nullptr;
    for (auto& s : schemas)
      if (s.name == sec) other = &s;
    if (!other) throw ConfigError(ErrorKind::unknown_key, sec, sec + ": unknown section");
    for (auto& [k, e] : entries)
      if (!other->find(k))
        throw ConfigError(ErrorKind::unknown_key, k,
                          k + ": unknown key in [" + sec + "] (config line " + std::to_string(e.line) + ")");
  }

  ResolvedConfig rc;
  rc.command = command;
  std::map<std::string, std::string> chosen;
  if (auto it = file.sections.find(command); it != file.sections.end())
    for (auto& [k, e] : it->second) chosen[k] = e.value;
  for (auto& [k, v] : overrides) {
    if (!cmd->find(k)) throw ConfigError(ErrorKind::unknown_key, k, k + ": unknown key for " + command);
    chosen[k] = v;
  }
  for (auto& spec : cmd->keys) {
    std::string raw;
    if (auto it = chosen.find(spec.name); it != chosen.end()) raw = it->second;
    else if (spec.default_value) raw = *spec.default_value;
    else throw ConfigError(ErrorKind::missing_key, spec.name, spec.name + ": required by " + command);
    Value v = parse_value(spec.name, spec.type, raw);
    if (spec.check)
      if (auto msg = spec.check(v)) throw ConfigError(ErrorKind::range_error, spec.name, spec.name + ": " + *msg);
    rc.values.push_back({spec.name, v});
  }

  std::map<std::string, std::string> g;
  if (auto it = file.sections.find(""); it != file.sections.end())
    for (auto& [k, e] : it->second) g[k] = e.value;
  for (auto& [k, v] : global_overrides) g[k] = v;
  if (auto it = g.find("seed"); it != g.end()) rc.seed = parse_value("seed", ValueType::u64, it->second).u64;
  if (auto it = g.find("jobs"); it != g.end()) {
    auto v = parse_value("jobs", ValueType::integer, it->second);
    if (v.integer < 1 || v.integer > 1024) throw ConfigError(ErrorKind::range_error, "jobs", "jobs: must lie in [1, 1024]");
    rc.jobs = static_cast<int>(v.integer);
  }
  if (auto it = g.find("out"); it != g.end()) rc.out = cfgdetail::trim(it->second);
  if (auto it = g.find("cache_dir"); it != g.end()) rc.cache_dir = cfgdetail::trim(it->second);
  if (auto it = file.sections.find("sources"); it != file.sections.end())
    for (auto& [k, e] : it->second) rc.sources[k] = e.value;
  return rc;
}

}  // namespace mesozeta
