// mtsr: command-line front end.
//
//   mtsr run -c run.cfg [--set section.key=value ...]
//   mtsr sweep -c sweep.cfg
//   mtsr analyze results.csv [...] [--knee] [--export data.txt]
//   mtsr couplings [-c geometry.cfg]
//   mtsr hopping --lmin 0.5 --lmax 3.0
//
// Exit status: 0 success, 1 usage, 2 validation, 3 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <tuple>

#include "CLI11.hpp"
#include "mtsr/mtsr.hpp"

namespace fs = std::filesystem;
using namespace mtsr;

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kRuntime = 3 };

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunSetup load_setup(const std::string& path, const std::vector<std::string>& overrides) {
  ConfigDocument doc = path.empty() ? ConfigDocument{} : parse_document(read_text_file(path));
  for (const auto& o : overrides) doc.set(o);
  return interpret(doc);
}

std::ofstream open_output(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

fs::path output_path(const RunSetup& s, const std::string& suffix) {
  return fs::path(s.output.dir) / (s.output.prefix + suffix);
}

void write_manifest(const RunSetup& s, const Manifest& m) {
  auto out = open_output(output_path(s, "_manifest.json"));
  out << m.text();
}

void print_summary(const RunResult& r) {
  std::cout << "k=" << format_double(r.config.k) << " L=" << r.config.length << " P0=" << format_double(r.config.p0)
            << " N=" << r.config.n << " " << name(r.config.init) << "/" << name(r.config.rule)
            << " seed=" << r.config.seed << ": M_N=" << r.reductions;
  if (auto t = r.tau())
    std::cout << " tau=" << format_double(*t) << " t0 (" << format_double(to_seconds(*t, r.config.epsilon))
              << " s at eps=" << format_double(r.config.epsilon) << ")";
  else
    std::cout << " tau=censored";
  std::cout << " norm_drift=" << format_double(r.max_norm_drift) << "\n";
}

int cmd_run(const std::string& config, const std::vector<std::string>& overrides) {
  const RunSetup setup = load_setup(config, overrides);
  const Manifest manifest = make_manifest(setup, "run");
  const CouplingTable table = setup.coupling_table();
  const Lattice lattice({setup.sim.length});

  std::ofstream events, trajectory;
  RunHooks hooks;
  if (setup.sim.record_events) {
    events = open_output(output_path(setup, "_events.csv"));
    write_preamble(events, manifest.hash, setup.sim.epsilon);
    write_events_header(events);
    hooks.event = [&](const ReductionEvent& ev) {
      write_event_row(events, {ev.step, ev.time, ev.rule, ev.size(), ev.alpha_fraction()});
    };
  }
  if (setup.sim.trajectory_stride > 0) {
    trajectory = open_output(output_path(setup, "_trajectory.csv"));
    write_preamble(trajectory, manifest.hash, setup.sim.epsilon);
    write_trajectory_header(trajectory);
    hooks.trajectory = [&](std::int64_t step, const StateVector& s) { write_trajectory_rows(trajectory, step, s); };
  }

  SimConfig sim = setup.sim;
  sim.record_events = false;  // streamed through the hook instead
  const RunResult result = run(sim, lattice, table, hooks);

  write_manifest(setup, manifest);
  auto out = open_output(output_path(setup, "_results.csv"));
  write_preamble(out, manifest.hash, setup.sim.epsilon);
  write_results_header(out);
  RunResult shown = result;
  shown.config.record_events = setup.sim.record_events;
  write_result_row(out, shown);
  print_summary(shown);
  return kOk;
}

int cmd_sweep(const std::string& config, const std::vector<std::string>& overrides) {
  const RunSetup setup = load_setup(config, overrides);
  const Manifest manifest = make_manifest(setup, "sweep");
  const CouplingTable table = setup.coupling_table();
  SweepGrid grid = setup.grid();
  grid.base.record_events = false;
  write_manifest(setup, manifest);

  auto out = open_output(output_path(setup, "_results.csv"));
  write_preamble(out, manifest.hash, setup.sim.epsilon);
  write_results_header(out);
  out.flush();
  std::ofstream errors;
  int failed = 0;
  const std::size_t total = grid.points().size();
  sweep(grid, table, [&](const SweepRow& row) {
    if (row.ok()) {
      write_result_row(out, *row.result);
      out.flush();
      std::cerr << "[" << row.index + 1 << "/" << total << "] ";
      print_summary(*row.result);
      return;
    }
    if (!failed++) {
      errors = open_output(output_path(setup, "_errors.csv"));
      write_preamble(errors, manifest.hash, setup.sim.epsilon);
      errors << "index,k_over_V0,L,P0,N,init,rule,seed,error\n";
    }
    const SimConfig& c = row.config;
    std::string msg = row.error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    errors << row.index << ',' << format_double(c.k) << ',' << c.length << ',' << format_double(c.p0) << ','
           << c.n << ',' << name(c.init) << ',' << name(c.rule) << ',' << c.seed << ',' << msg << "\n";
    errors.flush();
    std::cerr << "[" << row.index + 1 << "/" << total << "] failed: " << row.error << "\n";
  });
  if (failed) {
    std::cerr << failed << " of " << total << " sweep points failed; see "
              << output_path(setup, "_errors.csv").string() << "\n";
    return kRuntime;
  }
  return kOk;
}

// Mean tau over seeds for one parameter point.
struct Group {
  double k;
  int length;
  double p0;
  int n;
  std::string init, rule;
  std::vector<double> taus;
  int censored = 0;

  std::optional<double> mean() const {
    if (taus.empty()) return std::nullopt;
    double s = 0;
    for (double t : taus) s += t;
    return s / taus.size();
  }
};

struct AnalyzeOptions {
  std::vector<std::string> inputs;
  bool force = false;
  std::string fit = "both";
  double lo = -1, hi = -1;
  bool knee = false;
  double knee_threshold = 0.2;
  std::string export_path;
  bool min_cluster = false;
  double a0 = 0.85e-14, rate = 0.027;
  std::vector<double> targets{1e-2, 1e-1};
  std::vector<double> epsilons{1, 10, 100};
};

void print_fit(const char* label, const FitResult& f) {
  std::cout << "  " << label << ": prefactor=" << format_double(f.prefactor) << " +- "
            << format_double(f.prefactor_error) << " rate=" << format_double(f.rate) << " +- "
            << format_double(f.rate_error) << " points=" << f.points << " log_residual=" << format_double(f.residual_norm)
            << "\n";
}

void print_min_cluster(const AnalyzeOptions& o) {
  std::cout << "min_cluster_size (a0=" << format_double(o.a0) << " s, c=" << format_double(o.rate) << ")\n";
  std::cout << "tau_target_s";
  for (double e : o.epsilons) std::cout << ",eps=" << format_double(e);
  std::cout << "\n";
  for (double t : o.targets) {
    std::cout << format_double(t);
    for (double e : o.epsilons) std::cout << "," << min_cluster_size(t, e, o.a0, o.rate);
    std::cout << "\n";
  }
}

int cmd_analyze(const AnalyzeOptions& o) {
  if (o.inputs.empty()) {
    if (!o.min_cluster) throw CLI::ValidationError("analyze", "no results files given");
    print_min_cluster(o);
    return kOk;
  }
  std::set<std::string> hashes;
  std::optional<double> epsilon;
  std::map<std::tuple<double, int, double, int, std::string, std::string>, Group> groups;
  for (const auto& path : o.inputs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    const ResultsFile f = read_results(in);
    hashes.insert(f.manifest_hash);
    if (f.epsilon) epsilon = f.epsilon;
    for (const auto& r : f.rows) {
      auto& g = groups[{r.k, r.length, r.p0, r.n, r.init, r.rule}];
      g.k = r.k, g.length = r.length, g.p0 = r.p0, g.n = r.n, g.init = r.init, g.rule = r.rule;
      if (r.tau_t0) g.taus.push_back(*r.tau_t0);
      else ++g.censored;
    }
  }
  if (hashes.size() > 1 && !o.force)
    throw ValidationError("inputs come from " + std::to_string(hashes.size()) +
                          " different manifests; pass --force to combine them");

  std::cout << "points: " << groups.size() << " from " << o.inputs.size() << " file(s)";
  if (epsilon) std::cout << ", epsilon=" << format_double(*epsilon);
  std::cout << "\n";

  // tau vs N series per (k, L, P0, init, rule)
  std::map<std::tuple<double, int, double, std::string, std::string>, std::vector<FitPoint>> series;
  for (const auto& [key, g] : groups)
    if (auto m = g.mean()) series[{g.k, g.length, g.p0, g.init, g.rule}].push_back({static_cast<double>(g.n), *m});

  std::ofstream exp;
  if (!o.export_path.empty()) exp = open_output(o.export_path);

  for (auto& [key, pts] : series) {
    const auto& [k, length, p0, init, rule] = key;
    std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.x < b.x; });
    std::cout << "k=" << format_double(k) << " L=" << length << " P0=" << format_double(p0) << " " << init << "/"
              << rule << ": " << pts.size() << " N values, tau_sync=" << format_double(tau_sync(k, p0)) << " t0\n";
    if (exp) {
      exp << "# k=" << format_double(k) << " L=" << length << " P0=" << format_double(p0) << " " << init << "/"
          << rule << "\n# N tau_t0\n";
      for (const auto& p : pts) exp << format_double(p.x) << ' ' << format_double(p.y) << "\n";
      exp << "\n\n";
    }
    if (pts.size() < 3) continue;
    const double volume = 13.0 * length;
    const auto pred = PercolationPrediction::for_zone(p0);
    std::cout << "  percolation: p=" << format_double(pred.p) << " power-law window N <= "
              << format_double(pred.power_law_limit()) << "\n";
    const double nmin = pts.front().x, nmax = pts.back().x;
    auto attempt = [&](const char* label, auto fit, FitRange r) {
      try {
        print_fit(label, fit(pts, r));
      } catch (const std::invalid_argument& e) {
        std::cout << "  " << label << ": skipped (" << e.what() << ")\n";
      }
    };
    if (o.fit == "power" || o.fit == "both") {
      const FitRange r = o.lo >= 0 ? FitRange{o.lo, o.hi >= 0 ? o.hi : INFINITY} : FitRange{0, volume / 2};
      attempt("power tau=a N^b", [](auto& p, FitRange rr) { return fit_power_law(p, rr); }, r);
    }
    if (o.fit == "exponential" || o.fit == "both") {
      const FitRange r = o.lo >= 0 ? FitRange{o.lo, o.hi >= 0 ? o.hi : INFINITY}
                                   : FitRange{nmax - (nmax - nmin) / 3.0, INFINITY};
      attempt("exponential tau=a exp(c N)", [](auto& p, FitRange rr) { return fit_exponential(p, rr); }, r);
    }
  }

  if (o.knee) {
    // N = V points only, one k series per (L, P0, init, rule)
    std::map<std::tuple<int, double, std::string, std::string>, std::vector<KneePoint>> knees;
    for (const auto& [key, g] : groups)
      if (g.n == 13 * g.length) knees[{g.length, g.p0, g.init, g.rule}].push_back({g.k, g.mean()});
    for (auto& [key, s] : knees) {
      const auto& [length, p0, init, rule] = key;
      std::sort(s.begin(), s.end(), [](auto& a, auto& b) { return a.k < b.k; });
      const auto ka = detect_knee(s, p0, o.knee_threshold);
      std::cout << "knee L=" << length << " P0=" << format_double(p0) << " " << init << "/" << rule << ": ";
      if (ka) std::cout << "k_a=" << format_double(*ka) << " V0\n";
      else std::cout << "single-body throughout\n";
      if (exp) {
        exp << "# knee series L=" << length << " P0=" << format_double(p0) << "\n# k tau_t0 tau_sync\n";
        for (const auto& p : s)
          if (p.tau) exp << format_double(p.k) << ' ' << format_double(*p.tau) << ' ' << format_double(tau_sync(p.k, p0)) << "\n";
        exp << "\n\n";
      }
    }
  }
  if (o.min_cluster) print_min_cluster(o);
  return kOk;
}

int cmd_couplings(const std::string& config, const std::vector<std::string>& overrides) {
  const RunSetup setup = load_setup(config, overrides);
  const CouplingTable t = setup.coupling_table();
  write_coupling_csv(std::cout, t);
  const SpinCouplings s = spin_couplings(t, setup.sim.k);
  std::cout << "\ndirection,J\n";
  for (Direction d : kAllDirections) std::cout << name(d) << ',' << format_double(s[d]) << "\n";
  std::cout << "\nB_x," << format_double(s.b_x) << "\nB_y," << format_double(s.b_y) << "\nB_z,"
            << format_double(s.b_z) << "\ndelta_V_ratio," << format_double(delta_v_ratio(t)) << "\n";
  return kOk;
}

int cmd_hopping(double lmin, double lmax, double step, double separation) {
  if (!(lmin > 0) || !(lmax >= lmin) || !(step > 0)) throw ValidationError("need 0 < lmin <= lmax and step > 0");
  std::cout << "l_nm,overlap,resonance_V0,coulomb_V0,k_V0\n";
  const int n = static_cast<int>(std::floor((lmax - lmin) / step + 1e-9));
  for (int i = 0; i <= n; ++i) {
    const double l = lmin + i * step;
    const auto h = hopping_integrals(l, separation);
    std::cout << format_double(l) << ',' << format_double(h.overlap) << ',' << format_double(h.resonance) << ','
              << format_double(h.coulomb) << ',' << format_double(h.k) << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microtubule self-reduction simulator"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("-c,--config", config, "configuration file");
    if (required) opt->required()->check(CLI::ExistingFile);
    else opt->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "override a value: section.key=value (repeatable)");
  };

  auto* run_cmd = app.add_subcommand("run", "run one simulation");
  add_config(run_cmd, true);
  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid");
  add_config(sweep_cmd, true);

  AnalyzeOptions ao;
  auto* analyze = app.add_subcommand("analyze", "fit and summarize results CSVs");
  analyze->add_option("inputs", ao.inputs, "results CSV files")->check(CLI::ExistingFile);
  analyze->add_flag("--force", ao.force, "combine results from different manifests");
  analyze->add_option("--fit", ao.fit, "power, exponential, both or none")
      ->check(CLI::IsMember({"power", "exponential", "both", "none"}));
  analyze->add_option("--lo", ao.lo, "lower end of the fit window in N");
  analyze->add_option("--hi", ao.hi, "upper end of the fit window in N");
  analyze->add_flag("--knee", ao.knee, "locate k_a in N = V k-series");
  analyze->add_option("--knee-threshold", ao.knee_threshold, "relative departure from tau_sync");
  analyze->add_option("--export", ao.export_path, "write gnuplot-ready two-column blocks");
  analyze->add_flag("--min-cluster", ao.min_cluster, "print minimum cluster sizes");
  analyze->add_option("--a0", ao.a0, "exponential prefactor in seconds per unit epsilon");
  analyze->add_option("--rate", ao.rate, "exponential rate c'");
  analyze->add_option("--tau-target", ao.targets, "target times in seconds");
  analyze->add_option("--epsilon", ao.epsilons, "dielectric constants");

  auto* couplings = app.add_subcommand("couplings", "print the coupling and Ising tables");
  add_config(couplings, false);

  double lmin = 0.5, lmax = 3.0, lstep = 0.1, sep = 4.0;
  auto* hopping = app.add_subcommand("hopping", "print k against orbital radius");
  hopping->add_option("--lmin", lmin, "smallest orbital radius, nm");
  hopping->add_option("--lmax", lmax, "largest orbital radius, nm");
  hopping->add_option("--step", lstep, "radius step, nm");
  hopping->add_option("--separation", sep, "alpha-beta distance, nm");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(config, overrides);
    if (*sweep_cmd) return cmd_sweep(config, overrides);
    if (*analyze) return cmd_analyze(ao);
    if (*couplings) return cmd_couplings(config, overrides);
    if (*hopping) return cmd_hopping(lmin, lmax, lstep, sep);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const std::domain_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
