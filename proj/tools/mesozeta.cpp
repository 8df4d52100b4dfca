// mesozeta: batch runner. One subcommand per experiment; every run writes a
// JSON record (resolved config + results) and, where there is tabular data,
// a CSV next to it.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

#include <mesozeta/config.hpp>
#include <mesozeta/density.hpp>
#include <mesozeta/explicit.hpp>
#include <mesozeta/fetch.hpp>
#include <mesozeta/rmt.hpp>
#include <mesozeta/stats.hpp>
#include <mesozeta/zeros_io.hpp>

using namespace mesozeta;
using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- schemas

std::vector<CommandSchema> schemas() {
  auto real = ValueType::real;
  auto integer = ValueType::integer;
  auto text = ValueType::string;
  auto reals = ValueType::real_list;
  auto ints = ValueType::int_list;
  auto is_weight = [](const Value& v) -> std::optional<std::string> {
    if (v.text == "none") return std::nullopt;
    try {
      parse_smoothing_weight(v.text);
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::nullopt;
  };
  return {
      {"zeros-compute",
       "find and certify zeros on the critical line",
       {{"t_min", real, "0", "lower height", within(0, 1e8)},
        {"t_max", real, std::nullopt, "upper height", within(1, 1e8)},
        {"certify_at", real, "0", "Turing check height, 0 = t_max - 20", within(0, 1e8)}}},
      {"zeros-fetch", "download and cache a published zero table", {{"source", text, "odlyzko_zeros1", "registry id"}}},
      {"zeros-verify", "check a cached table against its digest", {{"source", text, "odlyzko_zeros1", "registry id"}}},
      {"clt",
       "sample the mesoscopic linear statistic over [T, 2T]",
       {{"T", real, "1e6", "height", within(100, 1e8)},
        {"n", real, "5", "mesoscopic scale", at_least(1)},
        {"eta", text, "indicator(0,1)", "test function literal"},
        {"samples", integer, "20000", "number of samples", within(2, 1e8)},
        {"weight", text, "none", "smoothing weight literal or none", is_weight},
        {"table", text, "computed", "computed or a registry id"},
        {"table_lo", real, "1", "table start in units of T", within(0, 10)},
        {"table_hi", real, "2", "table end in units of T", within(0, 10)}}},
      {"explicit",
       "both sides of the explicit formula",
       {{"g", text, std::nullopt, "pairing literal, e.g. bump(0,3)"},
        {"V", reals, "250,500,1000", "zero cutoffs", within(1, 1e6)}}},
      {"fujii",
       "moments of S(t+h) - S(t)",
       {{"T", real, "1e5", "height", within(1000, 1e7)},
        {"H_exp", real, "0.6", "H = T^H_exp", within(0.5, 1)},
        {"h_logT", reals, "4,16,64", "shifts in units of 1/log T", within(0, 1e6)},
        {"k", ints, "1,2", "half-orders", within(1, 4)},
        {"a", real, "0.05", "range parameter for H", within(1e-6, 0.5)}}},
      {"density-synth",
       "draw a synthetic off-axis ensemble",
       {{"T", real, "1e4", "reference height", within(100, 1e7)},
        {"c", real, "0.5", "decay rate of |A|", open_interval(0, 1)},
        {"offaxis_fraction", real, "0.5", "share of zeros moved off the line", within(0, 1)},
        {"height", real, "0", "top ordinate, 0 = T", within(0, 1e8)}}},
      {"density-windows",
       "windowed L^k sums over synthetic ensembles",
       {{"T", real, "1e4", "reference height", within(100, 1e7)},
        {"c", real, "0.5", "decay rate of |A|", open_interval(0, 1)},
        {"offaxis_fraction", real, "0.5", "share of zeros moved off the line", within(0, 1)},
        {"draws", integer, "20", "ensemble draws", within(1, 100000)},
        {"q_draws", integer, "2", "draws also used for the Q-smoothed sum", within(0, 100000)},
        {"offsets", reals, "2,4,8", "sigma - 1/2 in units of 1/log T", open_interval(0, 1e6)},
        {"H", reals, "1,2,4", "window lengths in mean spacings", within(1, 1e6)},
        {"k", ints, "1,2", "powers", within(1, 8)},
        {"weight", text, "uniform", "smoothing weight literal", is_weight}}},
      {"cue",
       "linear statistics of CUE eigenphases",
       {{"N", integer, "64", "matrix size", within(1, 1024)},
        {"f", text, "cos(1,2)", "circle function literal"},
        {"samples", integer, "100000", "number of samples", within(2, 1e8)},
        {"route", text, "cmv", "sampler: qr or cmv", one_of({"qr", "cmv"})}}},
  };
}

// ---------------------------------------------------------------- output

std::string num(double x) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

struct Csv {
  std::string body;
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) body += (i ? "," : "") + csv_field(cells[i]);
    body += "\n";
  }
};

struct Artifacts {
  json result = json::object();
  std::optional<Csv> csv;
};

fs::path csv_path(const fs::path& out) {
  fs::path p = out;
  p.replace_extension(".csv");
  return p;
}

// ---------------------------------------------------------------- commands

fs::path cache_dir_of(const ResolvedConfig& rc) {
  return rc.cache_dir.empty() ? default_cache_dir() : fs::path(rc.cache_dir);
}

SourceRegistry registry_of(const ResolvedConfig& rc) {
  SourceRegistry reg = default_registry();
  for (auto& [k, v] : rc.sources) reg[k] = parse_source_entry(k, v);
  return reg;
}

json table_json(const ZeroTable& t) {
  return {{"count", t.size()},
          {"t_min", t.t_min},
          {"t_max", t.t_max},
          {"certified", t.certified},
          {"source", source_name(t.source)}};
}

ZeroTable computed_table(double lo, double hi, const ResolvedConfig& rc) {
  return cached_find_zeros(std::max(0.0, std::floor(lo)), std::ceil(hi), cache_dir_of(rc), {},
                           FindOptions{rc.jobs, 1e-9});
}

Artifacts run_zeros_compute(const ResolvedConfig& rc) {
  double lo = rc.real("t_min"), hi = rc.real("t_max"), at = rc.real("certify_at");
  if (!(hi > lo)) throw ConfigError(ErrorKind::range_error, "t_max", "t_max: must exceed t_min");
  if (at == 0) at = hi - 20;
  if (at > hi - 20) throw ConfigError(ErrorKind::range_error, "certify_at", "certify_at: must be <= t_max - 20");
  ZeroTable t = cached_find_zeros(lo, hi, cache_dir_of(rc), {}, FindOptions{rc.jobs, 1e-9});
  Artifacts a;
  a.result["table"] = table_json(t);
  if (at > lo && at > 0) {
    std::int64_t n = turing_certify(t, at);
    a.result["certified_at"] = at;
    a.result["N"] = n;
  }
  a.result["first"] = std::vector<double>(t.ordinates.begin(), t.ordinates.begin() + std::min<std::size_t>(3, t.size()));
  a.csv.emplace();
  a.csv->row({"index", "ordinate"});
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto z = t.zero(i);
    a.csv->row({std::to_string(z.index), num(z.ordinate)});
  }
  return a;
}

Artifacts run_zeros_fetch(const ResolvedConfig& rc) {
  auto reg = registry_of(rc);
  std::string id = rc.text("source");
  if (!reg.count(id)) throw ConfigError(ErrorKind::unknown_source, "source", "source: no '" + id + "' in registry");
  ZeroTable t = fetch_zero_table(id, cache_dir_of(rc), reg);
  auto cp = cache_paths(id, cache_dir_of(rc));
  Artifacts a;
  a.result["source"] = id;
  a.result["table"] = table_json(t);
  a.result["sha256"] = trim(read_file(cp.digest));
  return a;
}

Artifacts run_zeros_verify(const ResolvedConfig& rc) {
  auto reg = registry_of(rc);
  std::string id = rc.text("source");
  if (!reg.count(id)) throw ConfigError(ErrorKind::unknown_source, "source", "source: no '" + id + "' in registry");
  verify_cache(id, cache_dir_of(rc), reg);
  auto cp = cache_paths(id, cache_dir_of(rc));
  Artifacts a;
  a.result["source"] = id;
  a.result["status"] = "ok";
  a.result["sha256"] = sha256_hex(read_file(cp.raw));
  return a;
}

ExperimentConfig clt_config(const ResolvedConfig& rc) {
  ExperimentConfig c;
  c.T = rc.real("T");
  c.n = rc.real("n");
  c.eta = parse_test_function(rc.text("eta"));
  c.samples = rc.integer("samples");
  if (rc.text("weight") != "none") c.weight = parse_smoothing_weight(rc.text("weight"));
  c.master_seed = rc.seed;
  c.jobs = rc.jobs;
  return c;
}

Artifacts run_clt(const ResolvedConfig& rc) {
  ExperimentConfig c = clt_config(rc);
  ZeroTable t;
  if (rc.text("table") == "computed") {
    double s = c.slack();
    t = computed_table(c.T * rc.real("table_lo") - s - 1, c.T * rc.real("table_hi") + s + 1, rc);
  } else {
    auto reg = registry_of(rc);
    if (!reg.count(rc.text("table")))
      throw ConfigError(ErrorKind::unknown_source, "table", "table: no '" + rc.text("table") + "' in registry");
    t = fetch_zero_table(rc.text("table"), cache_dir_of(rc), reg);
  }
  CltRun run = sample_clt(t, c);
  Artifacts a;
  a.result["report"] = run.report.to_json();
  a.result["captured_mass"] = run.captured_mass;
  a.result["table"] = table_json(t);
  a.csv.emplace();
  a.csv->row({"t", "delta"});
  for (std::size_t i = 0; i < run.t.size(); ++i) a.csv->row({num(run.t[i]), num(run.delta[i])});
  return a;
}

Artifacts run_explicit(const ResolvedConfig& rc) {
  PairingFunction g = parse_pairing(rc.text("g"));
  auto Vs = rc.at("V").reals;
  double Vmax = *std::max_element(Vs.begin(), Vs.end());
  ZeroTable t = computed_table(0, Vmax + 30, rc);
  turing_certify(t, Vmax);
  Artifacts a;
  a.csv.emplace();
  a.csv->row({"V", "zero_side", "prime_side", "discrepancy", "tail_estimate", "error_budget"});
  json sweep = json::array();
  for (double V : Vs) {
    auto r = explicit_formula_discrepancy(g, t, V);
    json row = {{"V", V},
                {"zero_side", r.zero_side},
                {"prime_side", r.prime_side},
                {"discrepancy", r.discrepancy},
                {"tail_estimate", r.tail_estimate},
                {"error_budget", r.error_budget}};
    sweep.push_back(row);
    a.csv->row({num(V), num(r.zero_side), num(r.prime_side), num(r.discrepancy), num(r.tail_estimate),
                num(r.error_budget)});
  }
  // headline record is the largest cutoff
  auto& last = sweep.back();
  for (auto k : {"zero_side", "prime_side", "discrepancy", "tail_estimate", "V"}) a.result[k] = last[k];
  a.result["support"] = {g.lo(), g.hi()};
  a.result["certified"] = t.certified;
  a.result["sweep"] = sweep;
  return a;
}

Artifacts run_fujii(const ResolvedConfig& rc) {
  double T = rc.real("T"), H = std::pow(T, rc.real("H_exp")), lt = std::log(T);
  auto hs = rc.at("h_logT").reals;
  double hmax = *std::max_element(hs.begin(), hs.end()) / lt;
  ZeroTable t = computed_table(0, T + H + hmax + 30, rc);
  Artifacts a;
  a.csv.emplace();
  a.csv->row({"h_logT", "k", "moment", "main_term", "main_term_2k", "ratio"});
  json rows = json::array();
  for (double hl : hs)
    for (long long k : rc.at("k").ints) {
      auto r = fujii_moment(t, T, H, hl / lt, static_cast<int>(k), rc.real("a"));
      rows.push_back({{"h_logT", hl},
                      {"k", k},
                      {"moment", r.moment},
                      {"main_term", r.main_term},
                      {"main_term_2k", r.main_term_2k},
                      {"ratio", r.ratio}});
      a.csv->row({num(hl), std::to_string(k), num(r.moment), num(r.main_term), num(r.main_term_2k), num(r.ratio)});
    }
  a.result["H"] = H;
  a.result["rows"] = rows;
  return a;
}

Artifacts run_density_synth(const ResolvedConfig& rc) {
  auto e = synthesize_offline_zeros(rc.real("T"), rc.real("c"), rc.real("offaxis_fraction"), rc.seed,
                                    rc.real("height"));
  std::size_t off = 0;
  for (double A : e.table.off_axis) off += A != 0;
  Artifacts a;
  a.result["count"] = e.table.size();
  a.result["off_axis"] = off;
  a.result["height"] = e.table.t_max;
  a.csv.emplace();
  a.csv->row({"ordinate", "A"});
  for (std::size_t i = 0; i < e.table.size(); ++i) a.csv->row({num(e.table.ordinates[i]), num(e.table.A(i))});
  return a;
}

Artifacts run_density_windows(const ResolvedConfig& rc) {
  WindowsStudy st;
  st.T = rc.real("T");
  st.c = rc.real("c");
  st.offaxis_fraction = rc.real("offaxis_fraction");
  st.draws = static_cast<int>(rc.integer("draws"));
  st.q_draws = static_cast<int>(rc.integer("q_draws"));
  st.offsets = rc.at("offsets").reals;
  st.Hs = rc.at("H").reals;
  for (long long k : rc.at("k").ints) st.ks.push_back(static_cast<int>(k));
  st.weight = parse_smoothing_weight(rc.text("weight"));
  st.seed = rc.seed;
  st.jobs = rc.jobs;
  if (st.q_draws > st.draws) throw ConfigError(ErrorKind::range_error, "q_draws", "q_draws: must be <= draws");
  double cap = std::pow(st.T, 0.25);
  for (double H : st.Hs)
    if (H > cap) throw ConfigError(ErrorKind::range_error, "H", "H: must be <= T^(1/4)");
  auto cells = density_windows_study(st);
  Artifacts a;
  json arr = json::array();
  a.csv.emplace();
  a.csv->row({"statistic", "offset", "H", "k", "draws", "mean_lhs", "rhs_bound", "mean_fitted", "min_fitted",
              "max_fitted"});
  std::map<int, std::pair<double, double>> spread;
  for (auto& c : cells) {
    arr.push_back(c.to_json());
    a.csv->row({c.statistic, num(c.offset), num(c.H), std::to_string(c.k), std::to_string(c.draws), num(c.mean_lhs),
                num(c.rhs_bound), num(c.mean_fitted), num(c.min_fitted), num(c.max_fitted)});
    if (c.statistic != "windowed") continue;
    auto [it, fresh] = spread.try_emplace(c.k, c.mean_fitted, c.mean_fitted);
    it->second.first = std::min(it->second.first, c.mean_fitted);
    it->second.second = std::max(it->second.second, c.mean_fitted);
  }
  json sp = json::object();
  for (auto& [k, mm] : spread) sp[std::to_string(k)] = mm.first > 0 ? mm.second / mm.first : INFINITY;
  a.result["cells"] = arr;
  a.result["windowed_spread"] = sp;
  return a;
}

Artifacts run_cue(const ResolvedConfig& rc) {
  auto f = parse_circle_function(rc.text("f"));
  auto route = rc.text("route") == "qr" ? CueRoute::qr : CueRoute::cmv;
  auto r = cue_clt(static_cast<int>(rc.integer("N")), f, rc.integer("samples"), rc.seed, route, rc.jobs);
  Artifacts a;
  a.result["report"] = r.to_json();
  return a;
}

// checks that need parsing beyond the schema, before any work happens
void prevalidate(const ResolvedConfig& rc) {
  auto keyed = [&](const std::string& key, auto&& f) {
    try {
      f();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      std::string m = e.what();
      m = m.substr(m.find(": ") + 2);
      if (m.rfind(key + ":", 0) != 0) m = key + ": " + m;
      throw ConfigError(e.kind(), key, m);
    }
  };
  const std::string& c = rc.command;
  keyed("sources", [&] { registry_of(rc); });
  if (c == "clt") {
    ExperimentConfig cfg;
    keyed("eta", [&] { cfg = clt_config(rc); });
    try {
      cfg.validate();
    } catch (const Error& e) {
      std::string m = e.what();
      m = m.substr(m.find(": ") + 2);
      throw ConfigError(e.kind(), m.substr(0, m.find(':')), m);
    }
    if (!(rc.real("table_hi") > rc.real("table_lo")))
      throw ConfigError(ErrorKind::range_error, "table_hi", "table_hi: must exceed table_lo");
  } else if (c == "explicit") {
    keyed("g", [&] { parse_pairing(rc.text("g")); });
  } else if (c == "cue") {
    keyed("f", [&] { parse_circle_function(rc.text("f")); });
  } else if (c == "fujii") {
    double T = rc.real("T"), H = std::pow(T, rc.real("H_exp"));
    if (H < std::pow(T, 0.5 + rc.real("a")))
      throw ConfigError(ErrorKind::range_error, "H_exp", "H_exp: H = T^H_exp must be >= T^(1/2 + a)");
    double hmax = H - std::pow(H / std::sqrt(T), 0.125);
    for (double hl : rc.at("h_logT").reals)
      if (hl / std::log(T) > hmax)
        throw ConfigError(ErrorKind::range_error, "h_logT", "h_logT: shift exceeds H - (H/sqrt T)^(1/8)");
  } else if (c == "density-synth") {
    double h = rc.real("height");
    if (h != 0 && h < rc.real("T")) throw ConfigError(ErrorKind::range_error, "height", "height: must be 0 or >= T");
  }
  if (!rc.out.empty()) {
    fs::path o(rc.out);
    if (fs::is_directory(o)) throw ConfigError(ErrorKind::io_error, "out", "out: is a directory");
  }
}

Artifacts dispatch(const ResolvedConfig& rc) {
  const std::string& c = rc.command;
  if (c == "zeros-compute") return run_zeros_compute(rc);
  if (c == "zeros-fetch") return run_zeros_fetch(rc);
  if (c == "zeros-verify") return run_zeros_verify(rc);
  if (c == "clt") return run_clt(rc);
  if (c == "explicit") return run_explicit(rc);
  if (c == "fujii") return run_fujii(rc);
  if (c == "density-synth") return run_density_synth(rc);
  if (c == "density-windows") return run_density_windows(rc);
  return run_cue(rc);
}

void report_error(const std::string& kind, const std::string& key, const std::string& message,
                  const std::string& command) {
  json e = {{"kind", kind},
            {"key", key.empty() ? json(nullptr) : json(key)},
            {"message", message},
            {"command", command.empty() ? json(nullptr) : json(command)}};
  std::cerr << json{{"error", e}}.dump() << "\n";
}

std::string strip_kind(const Error& e) {
  std::string m = e.what();
  auto p = m.find(": ");
  return p == std::string::npos ? m : m.substr(p + 2);
}

// "--key value" and "--key=value" pairs left over after CLI11; dashes in keys become underscores
std::vector<std::pair<std::string, std::string>> extra_pairs(const std::vector<std::string>& rest) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    const std::string& a = rest[i];
    if (a.rfind("--", 0) != 0 || a.size() < 3)
      throw ConfigError(ErrorKind::parse_error, "", "unexpected argument '" + a + "'");
    std::string k = a.substr(2), v;
    if (auto eq = k.find('='); eq != std::string::npos) {
      v = k.substr(eq + 1);
      k = k.substr(0, eq);
    } else {
      if (i + 1 >= rest.size()) throw ConfigError(ErrorKind::missing_key, k, k + ": flag needs a value");
      v = rest[++i];
    }
    for (auto& ch : k)
      if (ch == '-') ch = '_';
    for (auto& [pk, pv] : out)
      if (pk == k) throw ConfigError(ErrorKind::parse_error, k, k + ": given twice on the command line");
    out.push_back({k, v});
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  auto sch = schemas();
  CLI::App app{"mesozeta: zeta zero statistics experiments"};
  app.require_subcommand(1, 1);
  struct Globals {
    std::string config, out, seed, jobs, cache_dir;
  };
  std::map<std::string, Globals> globals;
  std::map<std::string, CLI::App*> subs;
  for (auto& s : sch) {
    std::string desc = s.help + "\n  keys:";
    for (auto& k : s.keys)
      desc += "\n    --" + k.name + " (" + type_name(k.type) + (k.default_value ? ", default " + *k.default_value : ", required") +
              ")  " + k.help;
    auto* sub = app.add_subcommand(s.name, desc);
    sub->allow_extras();
    auto& g = globals[s.name];
    sub->add_option("--config", g.config, "config file");
    sub->add_option("--out", g.out, "JSON output path (CSV goes alongside)");
    sub->add_option("--seed", g.seed, "master seed (u64)");
    sub->add_option("--jobs", g.jobs, "worker threads; never changes results");
    sub->add_option("--cache-dir", g.cache_dir, "zero table cache (else MESOZETA_CACHE_DIR)");
    subs[s.name] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("parse-error", "", e.what(), "");
    return 2;
  }

  std::string command;
  for (auto& [name, sub] : subs)
    if (sub->parsed()) command = name;

  ResolvedConfig rc;
  try {
    const Globals& g = globals[command];
    RawConfig file;
    if (!g.config.empty()) {
      if (!fs::exists(g.config)) throw ConfigError(ErrorKind::io_error, "config", "config: no such file " + g.config);
      file = parse_config_text(read_file(g.config));
    }
    std::map<std::string, std::string> gov;
    if (!g.out.empty()) gov["out"] = g.out;
    if (!g.seed.empty()) gov["seed"] = g.seed;
    if (!g.jobs.empty()) gov["jobs"] = g.jobs;
    if (!g.cache_dir.empty()) gov["cache_dir"] = g.cache_dir;
    rc = resolve_config(sch, command, file, extra_pairs(subs[command]->remaining()), gov);
    if (rc.out.empty()) rc.out = command + ".json";
    prevalidate(rc);
  } catch (const ConfigError& e) {
    report_error(kind_name(e.kind()), e.key(), strip_kind(e), command);
    return 2;
  } catch (const Error& e) {
    report_error(kind_name(e.kind()), "", strip_kind(e), command);
    return 2;
  }

  try {
    Artifacts a = dispatch(rc);
    json doc;
    doc["config"] = rc.to_json();
    doc["result"] = a.result;
    fs::path out(rc.out);
    // CSV first: the JSON appearing means the run is complete
    if (a.csv) write_file_atomic(csv_path(out), a.csv->body);
    write_file_atomic(out, doc.dump(2) + "\n");
    return 0;
  } catch (const ConfigError& e) {
    report_error(kind_name(e.kind()), e.key(), strip_kind(e), command);
  } catch (const Error& e) {
    report_error(kind_name(e.kind()), "", strip_kind(e), command);
  } catch (const std::exception& e) {
    report_error("internal", "", e.what(), command);
  }
  return 1;
}
