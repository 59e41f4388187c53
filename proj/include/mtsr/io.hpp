// File outputs: run manifest, results / events / trajectory / coupling CSVs.
//
// Every CSV starts with "# manifest=<hash>" and "# epsilon=<eps>" comment
// lines, then a header row. Floats are written in shortest round-trip form
// with std::to_chars, so output does not depend on the locale.
#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "mtsr/config.hpp"
#include "mtsr/lattice.hpp"
#include "mtsr/random.hpp"
#include "mtsr/simulation.hpp"

namespace mtsr {

#ifndef MTSR_VERSION
#define MTSR_VERSION "0.1.0"
#endif

inline std::string build_identifier() {
  std::string id = "mtsr " MTSR_VERSION;
#if defined(__clang__)
  id += " clang " __clang_version__;
#elif defined(__GNUC__)
  id += " gcc " __VERSION__;
#endif
  return id;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[i] = digits[v & 0xf];
  return out;
}

struct Manifest {
  nlohmann::json doc;
  std::string hash;

  std::string text() const { return doc.dump(2) + "\n"; }
};

inline nlohmann::json to_json(const SimConfig& c) {
  return {{"k_over_V0", c.k},
          {"L", c.length},
          {"P0", c.p0},
          {"N", c.n},
          {"init", std::string(name(c.init))},
          {"rule", std::string(name(c.rule))},
          {"steps", c.steps},
          {"dt_t0", c.dt},
          {"seed", c.seed},
          {"epsilon", c.epsilon},
          {"trajectory_stride", c.trajectory_stride}};
}

// `kind` is "run" or "sweep". No timestamps: identical inputs give identical
// manifests.
inline Manifest make_manifest(const RunSetup& setup, std::string_view kind) {
  Manifest m;
  m.doc["kind"] = kind;
  m.doc["build"] = build_identifier();
  m.doc["generator"] = std::string(kRngName);
  m.doc["seed"] = setup.sim.seed;
  m.doc["config"] = to_json(setup.sim);
  m.doc["config_text"] = serialize(setup);
  m.doc["t0_seconds_per_epsilon"] = kT0SecondsPerEpsilon;
  m.hash = hex64(fnv1a(m.doc.dump()));
  m.doc["hash"] = m.hash;
  return m;
}

inline void write_preamble(std::ostream& os, const std::string& manifest_hash, double epsilon) {
  os << "# manifest=" << manifest_hash << "\n# epsilon=" << format_double(epsilon) << "\n";
}

inline constexpr std::string_view kResultsHeader =
    "k_over_V0,L,P0,N,init,rule,seed,steps,M_N,tau_t0,tau_sec_eps1,censored_flag,max_norm_drift,energy_drift";

inline void write_results_header(std::ostream& os) { os << kResultsHeader << "\n"; }

// tau columns are empty for censored runs.
inline void write_result_row(std::ostream& os, const RunResult& r) {
  const SimConfig& c = r.config;
  os << format_double(c.k) << ',' << c.length << ',' << format_double(c.p0) << ',' << c.n << ',' << name(c.init)
     << ',' << name(c.rule) << ',' << c.seed << ',' << c.steps << ',' << r.reductions << ',';
  if (auto t = r.tau()) os << format_double(*t) << ',' << format_double(to_seconds(*t, 1.0));
  else os << ',';
  os << ',' << (r.censored() ? 1 : 0) << ',' << format_double(r.max_norm_drift) << ','
     << format_double(r.energy_drift) << "\n";
}

inline void write_events_header(std::ostream& os) { os << "step,t_R_t0,rule,cluster_size,outcome_alpha_fraction\n"; }

inline void write_event_row(std::ostream& os, const EventSummary& e) {
  os << e.step << ',' << format_double(e.time) << ',' << name(e.rule) << ',' << e.size << ','
     << format_double(e.alpha_fraction) << "\n";
}

inline void write_trajectory_header(std::ostream& os) { os << "step,site,occupation\n"; }

inline void write_trajectory_rows(std::ostream& os, std::int64_t step, const StateVector& s) {
  for (int i = 0; i < s.sites(); ++i) os << step << ',' << i << ',' << format_double(s.occupation(i)) << "\n";
}

// direction,gamma,gamma_prime,R_nm,V_over_V0; R is the distance that gives V.
inline void write_coupling_csv(std::ostream& os, const CouplingTable& t) {
  os << "direction,gamma,gamma_prime,R_nm,V_over_V0\n";
  const char* label[2] = {"alpha", "beta"};
  for (Direction d : kAllDirections)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        os << name(d) << ',' << label[a] << ',' << label[b] << ',' << format_double(1.0 / t[d][a][b]) << ','
           << format_double(t[d][a][b]) << "\n";
}

// One parsed row of a results CSV.
struct ResultRecord {
  double k = 0.0;
  int length = 0;
  double p0 = 0.0;
  int n = 0;
  std::string init;
  std::string rule;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  std::int64_t reductions = 0;
  std::optional<double> tau_t0;
  bool censored = false;
  double max_norm_drift = 0.0;
  double energy_drift = 0.0;
};

struct ResultsFile {
  std::string manifest_hash;
  std::optional<double> epsilon;
  std::vector<ResultRecord> rows;
};

namespace detail {

template <class T>
T csv_number(std::string_view field, int line) {
  T out{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::runtime_error("results line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
  return out;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace detail

inline ResultsFile read_results(std::istream& in) {
  ResultsFile f;
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.starts_with("# manifest=")) {
      f.manifest_hash = line.substr(11);
      continue;
    }
    if (line.starts_with("# epsilon=")) {
      f.epsilon = detail::csv_number<double>(std::string_view(line).substr(10), line_no);
      continue;
    }
    if (line.front() == '#') continue;
    if (!header) {
      if (line != kResultsHeader) throw std::runtime_error("results line " + std::to_string(line_no) + ": unexpected header");
      header = true;
      continue;
    }
    const auto fld = detail::split_csv(line);
    if (fld.size() != 14)
      throw std::runtime_error("results line " + std::to_string(line_no) + ": expected 14 columns");
    using detail::csv_number;
    ResultRecord r;
    r.k = csv_number<double>(fld[0], line_no);
    r.length = csv_number<int>(fld[1], line_no);
    r.p0 = csv_number<double>(fld[2], line_no);
    r.n = csv_number<int>(fld[3], line_no);
    r.init = std::string(fld[4]);
    r.rule = std::string(fld[5]);
    r.seed = csv_number<std::uint64_t>(fld[6], line_no);
    r.steps = csv_number<std::int64_t>(fld[7], line_no);
    r.reductions = csv_number<std::int64_t>(fld[8], line_no);
    if (!fld[9].empty()) r.tau_t0 = csv_number<double>(fld[9], line_no);
    r.censored = csv_number<int>(fld[11], line_no) != 0;
    r.max_norm_drift = csv_number<double>(fld[12], line_no);
    r.energy_drift = csv_number<double>(fld[13], line_no);
    f.rows.push_back(std::move(r));
  }
  if (!header) throw std::runtime_error("results file has no header row");
  return f;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mtsr
