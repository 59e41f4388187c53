// Plain-text run configuration.
//
//   # comment
//   [section]
//   key = value
//
// Sections: lattice, geometry | couplings, dynamics, reduction, run, sweep,
// output. Unknown sections or keys, duplicates, and values outside the
// documented ranges are rejected with the offending line number. List values
// (sweep axes) are comma separated. A cluster threshold may be written as a
// site count ("120") or relative to V = 13 L ("V", "V/2", "0.1V").
#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mtsr/lattice.hpp"
#include "mtsr/reduction.hpp"
#include "mtsr/simulation.hpp"

namespace mtsr {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;  // 0 for command-line overrides
};

// Raw sections in file order.
struct ConfigDocument {
  std::map<std::string, std::vector<ConfigEntry>> sections;

  const ConfigEntry* find(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    if (it == sections.end()) return nullptr;
    for (const auto& e : it->second)
      if (e.key == key) return &e;
    return nullptr;
  }

  // "section.key=value"; replaces an existing entry or appends one.
  void set(std::string_view assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq)
      throw ConfigError(0, "override must look like section.key=value: " + std::string(assignment));
    const std::string section = trim(assignment.substr(0, dot));
    const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
    const std::string value = trim(assignment.substr(eq + 1));
    auto& entries = sections[section];
    for (auto& e : entries) {
      if (e.key == key) {
        e.value = value;
        e.line = 0;
        return;
      }
    }
    entries.push_back({key, value, 0});
  }

  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
  }
};

inline ConfigDocument parse_document(std::string_view text) {
  ConfigDocument doc;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = ConfigDocument::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "malformed section header");
      section = ConfigDocument::trim(std::string_view(line).substr(1, line.size() - 2));
      if (doc.sections.contains(section)) throw ConfigError(line_no, "duplicate section [" + section + "]");
      doc.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected key = value");
    if (section.empty()) throw ConfigError(line_no, "key outside of any section");
    ConfigEntry entry{ConfigDocument::trim(std::string_view(line).substr(0, eq)),
                      ConfigDocument::trim(std::string_view(line).substr(eq + 1)), line_no};
    if (entry.key.empty()) throw ConfigError(line_no, "empty key");
    for (const auto& e : doc.sections[section])
      if (e.key == entry.key) throw ConfigError(line_no, "duplicate key '" + entry.key + "'");
    doc.sections[section].push_back(std::move(entry));
  }
  return doc;
}

struct OutputOptions {
  std::string dir = ".";
  std::string prefix = "mtsr";
  friend bool operator==(const OutputOptions&, const OutputOptions&) = default;
};

struct SweepAxes {
  std::vector<double> k;
  std::vector<int> length;
  std::vector<double> p0;
  std::vector<Threshold> n;
  std::vector<InitialCondition> init;
  std::vector<ReductionRule> rule;
  std::vector<std::uint64_t> seeds;
  int replicates = 0;  // derive this many seeds from [run] seed when `seeds` is empty
  int threads = 1;

  friend bool operator==(const SweepAxes&, const SweepAxes&) = default;
};

// Everything a config file can say.
struct RunSetup {
  SimConfig sim;
  Threshold threshold{10.0, false};
  std::optional<GeometryParams> geometry;  // default geometry when neither is set
  std::optional<CouplingTable> couplings;
  SweepAxes sweep;
  OutputOptions output;
  bool allow_out_of_range = false;

  CouplingTable coupling_table() const {
    if (couplings) return *couplings;
    return compute_coupling_table(geometry.value_or(GeometryParams{}));
  }

  SweepGrid grid() const {
    SweepGrid g;
    g.base = sim;
    g.k = sweep.k;
    g.length = sweep.length;
    g.p0 = sweep.p0;
    g.n = sweep.n;
    if (g.n.empty() && threshold.relative) g.n.push_back(threshold);
    g.init = sweep.init;
    g.rule = sweep.rule;
    g.seeds = sweep.seeds;
    if (g.seeds.empty() && sweep.replicates > 0) g.seeds = replicate_seeds(sim.seed, sweep.replicates);
    g.threads = sweep.threads;
    return g;
  }

  friend bool operator==(const RunSetup&, const RunSetup&) = default;
};

// Parameter ranges covered by the reference study; enforced unless
// allow_out_of_range is set.
struct StudyRanges {
  static constexpr double k_min = 0.002, k_max = 2.0;
  static constexpr int length_min = 50, length_max = 2000;
  static constexpr int n_min = 5, n_max = 26000;
  static constexpr double p0_min = 0.01, p0_max = 0.49;
  static constexpr std::int64_t steps_min = 100000, steps_max = 2000000;
};

namespace detail {

template <class T>
T parse_number(const ConfigEntry& e) {
  T out{};
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw ConfigError(e.line, "key '" + e.key + "': cannot parse '" + e.value + "' as a number");
  return out;
}

inline bool parse_bool(const ConfigEntry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ConfigError(e.line, "key '" + e.key + "': expected true or false");
}

inline std::vector<ConfigEntry> split_list(const ConfigEntry& e) {
  std::vector<ConfigEntry> out;
  std::size_t pos = 0;
  while (pos <= e.value.size()) {
    const auto comma = e.value.find(',', pos);
    const auto end = comma == std::string::npos ? e.value.size() : comma;
    std::string item = ConfigDocument::trim(std::string_view(e.value).substr(pos, end - pos));
    if (item.empty()) throw ConfigError(e.line, "key '" + e.key + "': empty list item");
    out.push_back({e.key, item, e.line});
    pos = end + 1;
  }
  return out;
}

inline Threshold parse_threshold(const ConfigEntry& e) {
  const std::string& v = e.value;
  if (v == "V") return {1.0, true};
  if (v.size() > 2 && v.starts_with("V/")) {
    const double den = parse_number<double>({e.key, v.substr(2), e.line});
    if (!(den > 0)) throw ConfigError(e.line, "key '" + e.key + "': bad fraction of V");
    return {1.0 / den, true};
  }
  if (v.size() > 1 && v.back() == 'V') {
    const double f = parse_number<double>({e.key, v.substr(0, v.size() - 1), e.line});
    if (!(f > 0)) throw ConfigError(e.line, "key '" + e.key + "': bad fraction of V");
    return {f, true};
  }
  return {static_cast<double>(parse_number<int>(e)), false};
}

inline InitialCondition parse_init(const ConfigEntry& e) {
  if (auto c = parse_initial_condition(e.value)) return *c;
  throw ConfigError(e.line, "key '" + e.key + "': initial condition must be US, SS, RIS or RCS");
}

inline ReductionRule parse_rule(const ConfigEntry& e) {
  if (auto r = parse_reduction_rule(e.value)) return *r;
  throw ConfigError(e.line, "key '" + e.key + "': reduction rule must be LR or GR");
}

template <class T>
std::string format(T v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string format_threshold(Threshold t) {
  if (!t.relative) return format(static_cast<int>(t.value));
  return format(t.value) + "V";
}

template <class T, class F>
std::string join(const std::vector<T>& v, F f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += f(v[i]);
  }
  return out;
}

}  // namespace detail

inline RunSetup interpret(const ConfigDocument& doc) {
  using namespace detail;
  static const std::map<std::string, std::vector<std::string>> known = {
      {"lattice", {"length"}},
      {"geometry", {"a_long", "a_trans", "pitch_up", "pitch_down", "separation"}},
      {"couplings",
       {"north_aa", "north_ab", "north_ba", "north_bb", "upper_east_aa", "upper_east_ab", "upper_east_ba",
        "upper_east_bb", "lower_east_aa", "lower_east_ab", "lower_east_ba", "lower_east_bb"}},
      {"dynamics", {"k", "dt"}},
      {"reduction", {"p0", "n", "rule"}},
      {"run", {"init", "steps", "seed", "epsilon", "trajectory_stride", "record_events", "allow_out_of_range"}},
      {"sweep", {"k", "length", "p0", "n", "init", "rule", "seeds", "replicates", "threads"}},
      {"output", {"dir", "prefix"}},
  };
  for (const auto& [section, entries] : doc.sections) {
    auto it = known.find(section);
    const int line = entries.empty() ? 0 : entries.front().line;
    if (it == known.end()) throw ConfigError(line, "unknown section [" + section + "]");
    for (const auto& e : entries)
      if (std::find(it->second.begin(), it->second.end(), e.key) == it->second.end())
        throw ConfigError(e.line, "unknown key '" + e.key + "' in [" + section + "]");
  }
  if (doc.sections.contains("geometry") && doc.sections.contains("couplings"))
    throw ConfigError(doc.sections.at("couplings").empty() ? 0 : doc.sections.at("couplings").front().line,
                      "give either [geometry] or [couplings], not both");

  RunSetup s;
  auto get = [&](const char* sec, const char* key) { return doc.find(sec, key); };
  auto line_of = [&](const char* sec, const char* key) {
    const ConfigEntry* e = get(sec, key);
    return e ? e->line : 0;
  };

  if (auto e = get("run", "allow_out_of_range")) s.allow_out_of_range = parse_bool(*e);
  if (auto e = get("lattice", "length")) s.sim.length = parse_number<int>(*e);
  if (doc.sections.contains("geometry")) {
    GeometryParams g;
    if (auto e = get("geometry", "a_long")) g.a_long = parse_number<double>(*e);
    if (auto e = get("geometry", "a_trans")) g.a_trans = parse_number<double>(*e);
    if (auto e = get("geometry", "pitch_up")) g.pitch_up = parse_number<double>(*e);
    if (auto e = get("geometry", "pitch_down")) g.pitch_down = parse_number<double>(*e);
    if (auto e = get("geometry", "separation")) g.separation = parse_number<double>(*e);
    try {
      compute_coupling_table(g);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(doc.sections.at("geometry").empty() ? 0 : doc.sections.at("geometry").front().line,
                        ex.what());
    }
    s.geometry = g;
  }
  if (doc.sections.contains("couplings")) {
    auto matrix = [&](const std::string& dir) {
      Matrix2 m{};
      const char* suffix[2][2] = {{"_aa", "_ab"}, {"_ba", "_bb"}};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const std::string key = dir + suffix[a][b];
          const ConfigEntry* e = doc.find("couplings", key);
          if (!e) throw ConfigError(0, "[couplings] is missing '" + key + "'");
          m[a][b] = parse_number<double>(*e);
          if (!(m[a][b] > 0)) throw ConfigError(e->line, "coupling '" + key + "' must be positive");
        }
      return m;
    };
    s.couplings = coupling_table_from(matrix("north"), matrix("upper_east"), matrix("lower_east"));
  }
  if (auto e = get("dynamics", "k")) s.sim.k = parse_number<double>(*e);
  if (auto e = get("dynamics", "dt")) s.sim.dt = parse_number<double>(*e);
  if (auto e = get("reduction", "p0")) s.sim.p0 = parse_number<double>(*e);
  if (auto e = get("reduction", "n")) s.threshold = parse_threshold(*e);
  if (auto e = get("reduction", "rule")) s.sim.rule = parse_rule(*e);
  if (auto e = get("run", "init")) s.sim.init = parse_init(*e);
  if (auto e = get("run", "steps")) s.sim.steps = parse_number<std::int64_t>(*e);
  if (auto e = get("run", "seed")) s.sim.seed = parse_number<std::uint64_t>(*e);
  if (auto e = get("run", "epsilon")) s.sim.epsilon = parse_number<double>(*e);
  if (auto e = get("run", "trajectory_stride")) s.sim.trajectory_stride = parse_number<std::int64_t>(*e);
  if (auto e = get("run", "record_events")) s.sim.record_events = parse_bool(*e);
  s.sim.n = s.threshold.resolve(s.sim.sites());

  if (auto e = get("sweep", "k"))
    for (const auto& it : split_list(*e)) s.sweep.k.push_back(parse_number<double>(it));
  if (auto e = get("sweep", "length"))
    for (const auto& it : split_list(*e)) s.sweep.length.push_back(parse_number<int>(it));
  if (auto e = get("sweep", "p0"))
    for (const auto& it : split_list(*e)) s.sweep.p0.push_back(parse_number<double>(it));
  if (auto e = get("sweep", "n"))
    for (const auto& it : split_list(*e)) s.sweep.n.push_back(parse_threshold(it));
  if (auto e = get("sweep", "init"))
    for (const auto& it : split_list(*e)) s.sweep.init.push_back(parse_init(it));
  if (auto e = get("sweep", "rule"))
    for (const auto& it : split_list(*e)) s.sweep.rule.push_back(parse_rule(it));
  if (auto e = get("sweep", "seeds"))
    for (const auto& it : split_list(*e)) s.sweep.seeds.push_back(parse_number<std::uint64_t>(it));
  if (auto e = get("sweep", "replicates")) {
    s.sweep.replicates = parse_number<int>(*e);
    if (s.sweep.replicates < 0) throw ConfigError(e->line, "replicates must be >= 0");
  }
  if (auto e = get("sweep", "threads")) {
    s.sweep.threads = parse_number<int>(*e);
    if (s.sweep.threads < 1) throw ConfigError(e->line, "threads must be >= 1");
  }
  if (auto e = get("output", "dir")) s.output.dir = e->value;
  if (auto e = get("output", "prefix")) s.output.prefix = e->value;

  // physical validity, always enforced
  auto physical = [](int line, auto&& check) {
    try {
      check();
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(line, ex.what());
    }
  };
  physical(line_of("dynamics", "k"), [&] { EomParams{s.sim.k, 1.0}.validate(); });
  physical(line_of("dynamics", "dt"), [&] { EomParams{0.0, s.sim.dt}.validate(); });
  if (!(s.sim.p0 > 0.0 && s.sim.p0 < 0.5))
    throw ConfigError(line_of("reduction", "p0"), "P0 = " + format(s.sim.p0) + " out of range: 0 < P0 < 0.5 required");
  for (double p : s.sweep.p0)
    if (!(p > 0.0 && p < 0.5))
      throw ConfigError(line_of("sweep", "p0"), "P0 = " + format(p) + " out of range: 0 < P0 < 0.5 required");
  physical(line_of("lattice", "length"), [&] { s.sim.validate(); });

  if (!s.allow_out_of_range) {
    auto range = [](int line, const std::string& what, double v, double lo, double hi) {
      if (v < lo || v > hi)
        throw ConfigError(line, what + " = " + format(v) + " outside [" + format(lo) + ", " + format(hi) +
                                    "] (set run.allow_out_of_range = true to override)");
    };
    using R = StudyRanges;
    range(line_of("dynamics", "k"), "k", s.sim.k, R::k_min, R::k_max);
    range(line_of("lattice", "length"), "L", s.sim.length, R::length_min, R::length_max);
    range(line_of("reduction", "p0"), "P0", s.sim.p0, R::p0_min, R::p0_max);
    range(line_of("reduction", "n"), "N", s.sim.n, R::n_min, R::n_max);
    range(line_of("run", "steps"), "steps", static_cast<double>(s.sim.steps), static_cast<double>(R::steps_min),
          static_cast<double>(R::steps_max));
    for (double k : s.sweep.k) range(line_of("sweep", "k"), "k", k, R::k_min, R::k_max);
    for (int l : s.sweep.length) range(line_of("sweep", "length"), "L", l, R::length_min, R::length_max);
    for (double p : s.sweep.p0) range(line_of("sweep", "p0"), "P0", p, R::p0_min, R::p0_max);
    for (const SimConfig& c : s.grid().points()) range(line_of("sweep", "n"), "N", c.n, R::n_min, R::n_max);
  }
  return s;
}

inline RunSetup parse_config(std::string_view text) { return interpret(parse_document(text)); }

// Canonical text form; parse_config(serialize(s)) == s.
inline std::string serialize(const RunSetup& s) {
  using namespace detail;
  std::ostringstream out;
  out << "[lattice]\nlength = " << s.sim.length << "\n\n";
  if (s.couplings) {
    const CouplingTable& t = *s.couplings;
    out << "[couplings]\n";
    const std::pair<const char*, Direction> dirs[] = {
        {"north", Direction::North}, {"upper_east", Direction::UpperEast}, {"lower_east", Direction::LowerEast}};
    const char* suffix[2][2] = {{"_aa", "_ab"}, {"_ba", "_bb"}};
    for (const auto& [label, d] : dirs)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) out << label << suffix[a][b] << " = " << format(t[d][a][b]) << "\n";
    out << "\n";
  } else if (s.geometry) {
    const GeometryParams& g = *s.geometry;
    out << "[geometry]\na_long = " << format(g.a_long) << "\na_trans = " << format(g.a_trans)
        << "\npitch_up = " << format(g.pitch_up) << "\npitch_down = " << format(g.pitch_down)
        << "\nseparation = " << format(g.separation) << "\n\n";
  }
  out << "[dynamics]\nk = " << format(s.sim.k) << "\ndt = " << format(s.sim.dt) << "\n\n";
  out << "[reduction]\np0 = " << format(s.sim.p0) << "\nn = " << format_threshold(s.threshold)
      << "\nrule = " << name(s.sim.rule) << "\n\n";
  out << "[run]\ninit = " << name(s.sim.init) << "\nsteps = " << s.sim.steps << "\nseed = " << s.sim.seed
      << "\nepsilon = " << format(s.sim.epsilon) << "\ntrajectory_stride = " << s.sim.trajectory_stride
      << "\nrecord_events = " << (s.sim.record_events ? "true" : "false")
      << "\nallow_out_of_range = " << (s.allow_out_of_range ? "true" : "false") << "\n";
  const SweepAxes& w = s.sweep;
  const bool any_sweep = !w.k.empty() || !w.length.empty() || !w.p0.empty() || !w.n.empty() || !w.init.empty() ||
                         !w.rule.empty() || !w.seeds.empty() || w.replicates > 0 || w.threads != 1;
  if (any_sweep) {
    out << "\n[sweep]\n";
    auto num = [](auto v) { return format(v); };
    if (!w.k.empty()) out << "k = " << join(w.k, num) << "\n";
    if (!w.length.empty()) out << "length = " << join(w.length, num) << "\n";
    if (!w.p0.empty()) out << "p0 = " << join(w.p0, num) << "\n";
    if (!w.n.empty()) out << "n = " << join(w.n, format_threshold) << "\n";
    if (!w.init.empty()) out << "init = " << join(w.init, [](auto c) { return std::string(name(c)); }) << "\n";
    if (!w.rule.empty()) out << "rule = " << join(w.rule, [](auto r) { return std::string(name(r)); }) << "\n";
    if (!w.seeds.empty()) out << "seeds = " << join(w.seeds, num) << "\n";
    if (w.replicates > 0) out << "replicates = " << w.replicates << "\n";
    out << "threads = " << w.threads << "\n";
  }
  out << "\n[output]\ndir = " << s.output.dir << "\nprefix = " << s.output.prefix << "\n";
  return out.str();
}

}  // namespace mtsr
