// Full self-reduction runs, tau_N statistics and parameter sweeps.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "mtsr/dynamics.hpp"
#include "mtsr/lattice.hpp"
#include "mtsr/random.hpp"
#include "mtsr/reduction.hpp"

namespace mtsr {

// t0 = hbar / V0 = 4.571e-16 * eps seconds.
inline constexpr double kT0SecondsPerEpsilon = 4.571e-16;

inline double to_seconds(double t_in_t0, double epsilon) { return t_in_t0 * kT0SecondsPerEpsilon * epsilon; }

enum class InitialCondition : std::uint8_t { Uniform, Stripe, RandomIsing, RandomComplex };

constexpr std::string_view name(InitialCondition c) {
  switch (c) {
    case InitialCondition::Uniform: return "US";
    case InitialCondition::Stripe: return "SS";
    case InitialCondition::RandomIsing: return "RIS";
    case InitialCondition::RandomComplex: return "RCS";
  }
  return "?";
}

inline std::optional<InitialCondition> parse_initial_condition(std::string_view s) {
  for (auto c : {InitialCondition::Uniform, InitialCondition::Stripe, InitialCondition::RandomIsing,
                 InitialCondition::RandomComplex})
    if (name(c) == s) return c;
  return std::nullopt;
}

inline std::optional<ReductionRule> parse_reduction_rule(std::string_view s) {
  if (s == "LR") return ReductionRule::Local;
  if (s == "GR") return ReductionRule::Global;
  return std::nullopt;
}

struct SimConfig {
  double k = 0.1;        // V0
  int length = 100;      // L
  double p0 = 0.3;
  int n = 10;            // minimum cluster size that triggers a reduction
  InitialCondition init = InitialCondition::RandomIsing;
  ReductionRule rule = ReductionRule::Local;
  std::int64_t steps = 100000;
  double dt = 0.01;      // t0
  std::uint64_t seed = 1;
  double epsilon = 10.0;  // only converts t0 to seconds
  std::int64_t trajectory_stride = 0;
  bool record_events = true;

  int sites() const { return kColumns * length; }
  double total_time() const { return static_cast<double>(steps) * dt; }

  void validate() const {
    EomParams{k, dt}.validate();
    ResetZone{p0}.validate();
    if (length < 1) throw std::invalid_argument("length L must be >= 1");
    if (n < 1) throw std::invalid_argument("cluster threshold N must be >= 1");
    if (steps < 1) throw std::invalid_argument("step count must be >= 1");
    if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be > 0");
    if (trajectory_stride < 0) throw std::invalid_argument("trajectory stride must be >= 0");
  }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct EventSummary {
  std::int64_t step = 0;
  double time = 0.0;
  ReductionRule rule = ReductionRule::Local;
  int size = 0;
  double alpha_fraction = 0.0;

  friend bool operator==(const EventSummary&, const EventSummary&) = default;
};

struct RunResult {
  SimConfig config;
  std::int64_t reductions = 0;  // M_N
  std::vector<EventSummary> events;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double max_norm_drift = 0.0;
  double energy_drift = 0.0;  // worst relative E_v change over a reduction-free stretch

  bool censored() const { return reductions == 0; }

  // t_total / M_N in t0; empty when no reduction happened.
  std::optional<double> tau() const {
    if (censored()) return std::nullopt;
    return config.total_time() / static_cast<double>(reductions);
  }
  std::optional<double> tau_seconds(double epsilon) const {
    if (auto t = tau()) return to_seconds(*t, epsilon);
    return std::nullopt;
  }

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

// Odd columns (1-based) start in |a>, even ones in |b>; columns 13 and 1
// then agree, which is the single frustrated seam.
inline Position stripe_position(int column, int seam = kColumns - 1) {
  const int shifted = (column - seam - 1 + 2 * kColumns) % kColumns;
  return shifted % 2 == 0 ? Position::Alpha : Position::Beta;
}

inline StateVector init_state(InitialCondition cond, const Lattice& lattice, Rng& rng) {
  StateVector s(lattice.sites());
  switch (cond) {
    case InitialCondition::Uniform:
      break;
    case InitialCondition::Stripe:
      for (int i = 0; i < s.sites(); ++i) s.set_pure(i, stripe_position(Lattice::column(i)));
      break;
    case InitialCondition::RandomIsing:
      for (int i = 0; i < s.sites(); ++i) s.set_pure(i, bernoulli(rng, 0.5) ? Position::Alpha : Position::Beta);
      break;
    case InitialCondition::RandomComplex:
      for (int i = 0; i < s.sites(); ++i) {
        const double u = uniform01(rng);
        const double phi_a = 2.0 * std::numbers::pi * uniform01(rng);
        const double phi_b = 2.0 * std::numbers::pi * uniform01(rng);
        s.alpha[i] = std::polar(std::sqrt(u), phi_a);
        s.beta[i] = std::polar(std::sqrt(1.0 - u), phi_b);
      }
      break;
  }
  return s;
}

// Called with (step, state) at step 0 and every `trajectory_stride` steps,
// after that step's reductions.
using TrajectoryObserver = std::function<void(std::int64_t, const StateVector&)>;
using EventObserver = std::function<void(const ReductionEvent&)>;

struct RunHooks {
  TrajectoryObserver trajectory;
  EventObserver event;
};

inline RunResult run(const SimConfig& config, const Lattice& lattice, const CouplingTable& table,
                     const RunHooks& hooks = {}) {
  config.validate();
  if (lattice.length() != config.length) throw std::invalid_argument("lattice length does not match the config");

  Rng rng(config.seed);
  StateVector state = init_state(config.init, lattice, rng);
  Propagator prop(lattice, table, EomParams{config.k, config.dt});
  const ResetZone zone{config.p0};
  ClusterLabeler labeler;
  SiteMask mask(lattice.sites());

  RunResult result;
  result.config = config;
  result.initial_energy = prop.energy(state);
  double segment_energy = result.initial_energy;
  auto note_energy = [&](double e) {
    const double scale = std::max(std::abs(segment_energy), 1e-300);
    result.energy_drift = std::max(result.energy_drift, std::abs(e - segment_energy) / scale);
  };

  const bool observe = hooks.trajectory && config.trajectory_stride > 0;
  if (observe) hooks.trajectory(0, state);

  for (std::int64_t step = 1; step <= config.steps; ++step) {
    prop.step(state);
    state.time = static_cast<double>(step) * config.dt;  // no accumulated rounding

    double drift = 0.0;
    int in_zone = 0;
    for (int i = 0; i < state.sites(); ++i) {
      const double a = std::norm(state.alpha[i]);
      drift = std::max(drift, std::abs(a + std::norm(state.beta[i]) - 1.0));
      const bool inside = zone.contains(a);
      mask[i] = inside ? 1 : 0;
      in_zone += inside;
    }
    result.max_norm_drift = std::max(result.max_norm_drift, drift);
    if (drift > Propagator::kDriftLimit)
      throw IntegrationFailure("norm drift " + std::to_string(drift) + " at step " + std::to_string(step));

    if (in_zone >= config.n) {
      const auto clusters = labeler.qualifying(mask, lattice, config.n);
      if (!clusters.empty()) {
        note_energy(prop.energy(state));
        for (const Cluster& c : clusters) {
          ReductionEvent ev = apply_reduction(config.rule, state, c, rng, step);
          if (config.record_events)
            result.events.push_back({ev.step, ev.time, ev.rule, ev.size(), ev.alpha_fraction()});
          if (hooks.event) hooks.event(ev);
        }
        result.reductions += static_cast<std::int64_t>(clusters.size());
        segment_energy = prop.energy(state);
      }
    }

    if (observe && step % config.trajectory_stride == 0) hooks.trajectory(step, state);
  }

  result.final_energy = prop.energy(state);
  note_energy(result.final_energy);
  return result;
}

struct TauEstimate {
  std::optional<double> mean;  // t0; empty when every run was censored
  double standard_error = 0.0;
  int runs = 0;                // runs that contributed to the mean
  int censored = 0;

  bool observed() const { return mean.has_value(); }
};

// Mean and standard error of tau_N across independent runs. Censored runs
// (M_N = 0) are counted but left out of the mean.
inline TauEstimate tau_estimate(std::span<const RunResult> results) {
  if (results.empty()) throw std::invalid_argument("tau_estimate needs at least one run");
  std::vector<double> taus;
  TauEstimate est;
  for (const auto& r : results) {
    if (auto t = r.tau()) taus.push_back(*t);
    else ++est.censored;
  }
  est.runs = static_cast<int>(taus.size());
  if (taus.empty()) return est;
  double sum = 0.0;
  for (double t : taus) sum += t;
  const double mean = sum / taus.size();
  est.mean = mean;
  if (taus.size() > 1) {
    double ss = 0.0;
    for (double t : taus) ss += (t - mean) * (t - mean);
    est.standard_error = std::sqrt(ss / (taus.size() - 1) / taus.size());
  }
  return est;
}

// Cluster threshold either as a site count or as a fraction of V = 13 L.
struct Threshold {
  double value = 10.0;
  bool relative = false;

  int resolve(int sites) const {
    if (!relative) return static_cast<int>(value);
    return std::max(1, static_cast<int>(std::lround(value * sites)));
  }
  friend bool operator==(const Threshold&, const Threshold&) = default;
};

// Cartesian grid; an empty axis keeps the base value. Points are ordered
// with k outermost, then L, P0, N, init, rule, and seed innermost.
struct SweepGrid {
  SimConfig base;
  std::vector<double> k;
  std::vector<int> length;
  std::vector<double> p0;
  std::vector<Threshold> n;
  std::vector<InitialCondition> init;
  std::vector<ReductionRule> rule;
  std::vector<std::uint64_t> seeds;
  int threads = 1;

  std::vector<SimConfig> points() const {
    auto axis = [](const auto& v, auto fallback) {
      using T = std::decay_t<decltype(fallback)>;
      return v.empty() ? std::vector<T>{fallback} : std::vector<T>(v.begin(), v.end());
    };
    std::vector<SimConfig> out;
    for (double kk : axis(k, base.k))
      for (int len : axis(length, base.length))
        for (double pp : axis(p0, base.p0))
          for (Threshold th : axis(n, Threshold{static_cast<double>(base.n), false}))
            for (InitialCondition ic : axis(init, base.init))
              for (ReductionRule rr : axis(rule, base.rule))
                for (std::uint64_t sd : axis(seeds, base.seed)) {
                  SimConfig c = base;
                  c.k = kk;
                  c.length = len;
                  c.p0 = pp;
                  c.n = th.resolve(kColumns * len);
                  c.init = ic;
                  c.rule = rr;
                  c.seed = sd;
                  out.push_back(c);
                }
    return out;
  }
};

// `count` replicate seeds derived from `master`.
inline std::vector<std::uint64_t> replicate_seeds(std::uint64_t master, int count) {
  std::vector<std::uint64_t> out;
  for (int j = 0; j < count; ++j) out.push_back(derive_seed(master, static_cast<std::uint64_t>(j)));
  return out;
}

struct SweepRow {
  std::size_t index = 0;
  SimConfig config;
  std::optional<RunResult> result;
  std::string error;  // set when the point failed

  bool ok() const { return result.has_value(); }
};

using RowSink = std::function<void(const SweepRow&)>;

// Runs every grid point. Failures are recorded per row and do not stop the
// sweep. Rows reach `sink` (and the returned vector) in grid order whatever
// order the workers finish in.
inline std::vector<SweepRow> sweep(const SweepGrid& grid, const CouplingTable& table, const RowSink& sink = {}) {
  const std::vector<SimConfig> points = grid.points();
  std::vector<SweepRow> rows(points.size());
  std::vector<char> done(points.size(), 0);
  std::map<int, Lattice> lattices;
  for (const auto& p : points)
    if (p.length >= 1 && !lattices.contains(p.length)) lattices.emplace(p.length, Lattice({p.length}));

  std::atomic<std::size_t> next{0};
  std::mutex emit_mutex;
  std::size_t emitted = 0;

  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      SweepRow row{i, points[i], std::nullopt, {}};
      try {
        auto it = lattices.find(points[i].length);
        if (it == lattices.end()) throw std::invalid_argument("length L must be >= 1");
        row.result = run(points[i], it->second, table);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      std::lock_guard lock(emit_mutex);
      rows[i] = std::move(row);
      done[i] = 1;
      while (emitted < rows.size() && done[emitted]) {
        if (sink) sink(rows[emitted]);
        ++emitted;
      }
    }
  };

  const int threads = std::max(1, std::min<int>(grid.threads, static_cast<int>(points.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return rows;
}

}  // namespace mtsr
