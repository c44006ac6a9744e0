#include "krf/config.hpp"

#include "krf/error.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace krf::config {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

double parse_double(const Entry& e, const std::string& origin) {
  const std::string v = trim(e.value);
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(origin, e.line, "expected a number for '" + e.key + "', got '" + v + "'");
  return out;
}

long parse_int(const Entry& e, const std::string& origin) {
  const std::string v = trim(e.value);
  long out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(origin, e.line, "expected an integer for '" + e.key + "', got '" + v + "'");
  return out;
}

std::vector<Rational> parse_vector(const Entry& e, const std::string& origin) {
  std::vector<Rational> out;
  for (const auto& w : split_words(e.value)) {
    try {
      out.push_back(parse_rational(w));
    } catch (const ConfigError& err) {
      fail(origin, e.line, err.what());
    }
  }
  return out;
}

}  // namespace

std::string content_hash(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_experiment(std::string_view text, const std::string& origin) {
  std::map<std::string, std::vector<Entry>> sections;
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_no, "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "expected 'key = value'");
    if (section.empty()) fail(origin, line_no, "entry outside of any [section]");
    Entry e{trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)), line_no};
    if (e.key.empty()) fail(origin, line_no, "empty key");
    sections[section].push_back(std::move(e));
  }

  const std::set<std::string> known{"model", "classes", "intersection", "solver", "monitor", "rates", "output"};
  for (const auto& [name, entries] : sections)
    if (!known.count(name)) fail(origin, entries.front().line, "unknown section [" + name + "]");

  ExperimentConfig cfg;
  cfg.source_text = std::string(text);
  cfg.origin = origin;

  auto single = [&](const std::string& sec, const std::string& key) -> const Entry* {
    const Entry* found = nullptr;
    for (const auto& e : sections[sec]) {
      if (e.key != key) continue;
      if (found) fail(origin, e.line, "duplicate key '" + key + "'");
      found = &e;
    }
    return found;
  };
  auto required = [&](const std::string& sec, const std::string& key) -> const Entry& {
    const Entry* e = single(sec, key);
    if (!e) fail(origin, line_no, "missing required key '" + key + "' in [" + sec + "]");
    return *e;
  };

  // [model]
  int r = 1;
  try {
    cfg.kind = calabi::parse_ansatz_kind(required("model", "kind").value);
  } catch (const ConfigError& err) {
    fail(origin, required("model", "kind").line, err.what());
  }
  cfg.n = static_cast<int>(parse_int(required("model", "n"), origin));
  if (const Entry* e = single("model", "r")) r = static_cast<int>(parse_int(*e, origin));
  for (const auto& e : sections["model"])
    if (e.key != "kind" && e.key != "n" && e.key != "r") fail(origin, e.line, "unknown key '" + e.key + "' in [model]");

  // [classes]
  auto& cd = cfg.classes;
  const Entry& gens = required("classes", "generators");
  try {
    cd.basis = classes::GeneratorBasis(split_words(gens.value), cfg.n, r);
  } catch (const ConfigError& err) {
    fail(origin, gens.line, err.what());
  }
  auto read_class = [&](const std::string& key) {
    const Entry& e = required("classes", key);
    auto v = parse_vector(e, origin);
    if (v.size() != cd.basis.size())
      fail(origin, e.line, "'" + key + "' has " + std::to_string(v.size()) + " coefficients, basis has " +
                               std::to_string(cd.basis.size()));
    return classes::KahlerClass(std::move(v));
  };
  cd.omega0 = read_class("omega0");
  cd.c1 = read_class("c1");
  cd.sigma = read_class("sigma");
  for (const auto& e : sections["classes"]) {
    if (e.key == "cone") {
      auto v = parse_vector(e, origin);
      if (v.size() != cd.basis.size()) fail(origin, e.line, "cone functional length does not match the basis");
      cd.cone.functionals.push_back(std::move(v));
      cd.cone.names.push_back("cone#" + std::to_string(cd.cone.functionals.size()));
    } else if (e.key != "generators" && e.key != "omega0" && e.key != "c1" && e.key != "sigma") {
      fail(origin, e.line, "unknown key '" + e.key + "' in [classes]");
    }
  }
  if (cd.cone.functionals.empty()) fail(origin, gens.line, "no cone functionals given");

  // [intersection]
  cd.table = classes::IntersectionTable(cfg.n);
  for (const auto& e : sections["intersection"]) {
    std::vector<std::size_t> mono;
    std::size_t start = 0;
    while (start <= e.key.size()) {
      auto dot = e.key.find('.', start);
      if (dot == std::string::npos) dot = e.key.size();
      try {
        mono.push_back(cd.basis.index_of(e.key.substr(start, dot - start)));
      } catch (const ConfigError& err) {
        fail(origin, e.line, err.what());
      }
      start = dot + 1;
    }
    if (static_cast<int>(mono.size()) != cfg.n)
      fail(origin, e.line, "intersection monomial '" + e.key + "' must have degree " + std::to_string(cfg.n));
    try {
      cd.table.set(mono, parse_rational(e.value));
    } catch (const ConfigError& err) {
      fail(origin, e.line, err.what());
    }
  }

  // [solver]
  for (const auto& e : sections["solver"]) {
    auto& s = cfg.solver;
    if (e.key == "N") s.N = static_cast<std::size_t>(parse_int(e, origin));
    else if (e.key == "R") s.R = parse_double(e, origin);
    else if (e.key == "dump_points") s.dump_points = static_cast<std::size_t>(parse_int(e, origin));
    else if (e.key == "dt_max") s.dt_max = parse_double(e, origin);
    else if (e.key == "eps_stop") s.eps_stop = parse_double(e, origin);
    else if (e.key == "safety") s.safety = parse_double(e, origin);
    else if (e.key == "tolerance") s.tolerance = parse_double(e, origin);
    else if (e.key == "kappa") s.kappa = parse_double(e, origin);
    else if (e.key == "dt_floor") s.dt_floor = parse_double(e, origin);
    else if (e.key == "gauge") s.gauge = parse_double(e, origin);
    else fail(origin, e.line, "unknown key '" + e.key + "' in [solver]");
    if (e.key != "gauge" && !(parse_double(e, origin) > 0)) fail(origin, e.line, "'" + e.key + "' must be positive");
  }
  if (cfg.solver.N < 16 || cfg.solver.N % 2) fail(origin, required("solver", "N").line, "N must be even and >= 16");
  if (cfg.solver.eps_stop < 10 * cfg.solver.dt_floor)
    fail(origin, line_no, "eps_stop must be at least 10 x dt_floor");

  // [monitor]
  for (const auto& e : sections["monitor"]) {
    if (e.key == "cadence") cfg.monitor.cadence = static_cast<std::size_t>(parse_int(e, origin));
    else if (e.key == "B") cfg.monitor.B = parse_double(e, origin);
    else if (e.key == "A") cfg.monitor.A = parse_double(e, origin);
    else fail(origin, e.line, "unknown key '" + e.key + "' in [monitor]");
    if (!(parse_double(e, origin) > 0)) fail(origin, e.line, "'" + e.key + "' must be positive");
  }

  // [rates]
  for (const auto& e : sections["rates"]) {
    auto& rs = cfg.rates;
    if (e.key == "window_decades") {
      rs.window_decades = parse_double(e, origin);
    } else if (e.key == "bounded_factor") {
      rs.bounded_factor = parse_double(e, origin);
    } else if (e.key == "bounded") {
      rs.bounded = split_words(e.value);
    } else if (e.key.rfind("expect.", 0) == 0 || e.key.rfind("lower.", 0) == 0) {
      const bool lower = e.key.rfind("lower.", 0) == 0;
      auto words = split_words(e.value);
      if (words.size() != 2) fail(origin, e.line, "expected '<exponent> <tolerance>'");
      Expectation x;
      x.quantity = e.key.substr(lower ? 6 : 7);
      x.lower_bound_only = lower;
      Entry a{e.key, words[0], e.line}, b{e.key, words[1], e.line};
      x.exponent = parse_double(a, origin);
      x.tolerance = parse_double(b, origin);
      rs.expectations.push_back(x);
    } else {
      fail(origin, e.line, "unknown key '" + e.key + "' in [rates]");
    }
  }

  for (const auto& e : sections["output"]) {
    if (e.key == "dir") cfg.output_dir = e.value;
    else fail(origin, e.line, "unknown key '" + e.key + "' in [output]");
  }
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str(), path.string());
}

}  // namespace krf::config
