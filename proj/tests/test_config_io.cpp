#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "mtsr/config.hpp"
#include "mtsr/io.hpp"

using namespace mtsr;

namespace {

const char* kMinimal = R"(
[dynamics]
k = 0.1
[lattice]
length = 50
[reduction]
n = 20
p0 = 0.3
)";

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

RunSetup random_setup(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  RunSetup s;
  s.allow_out_of_range = coin(rng);
  s.sim.k = 0.002 + u(rng) * 1.9;
  s.sim.length = 50 + static_cast<int>(u(rng) * 500);
  s.sim.dt = 0.001 + u(rng) * 0.05;
  s.sim.p0 = 0.01 + u(rng) * 0.48;
  s.sim.rule = coin(rng) ? ReductionRule::Local : ReductionRule::Global;
  s.sim.init = static_cast<InitialCondition>(std::uniform_int_distribution<int>(0, 3)(rng));
  s.sim.steps = 100000 + static_cast<std::int64_t>(u(rng) * 1e6);
  s.sim.seed = rng();
  s.sim.epsilon = 1 + u(rng) * 99;
  s.sim.trajectory_stride = coin(rng) ? 0 : 1000;
  s.sim.record_events = coin(rng);
  s.threshold = coin(rng) ? Threshold{static_cast<double>(5 + static_cast<int>(u(rng) * 300)), false}
                          : Threshold{0.05 + 0.95 * u(rng), true};
  s.sim.n = s.threshold.resolve(s.sim.sites());
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: break;
    case 1: {
      GeometryParams g;
      g.a_long = 6 + 4 * u(rng);
      g.pitch_down = -4 * u(rng);
      g.pitch_up = g.pitch_down + g.a_long;
      g.a_trans = 3 + 3 * u(rng);
      g.separation = 1 + 4 * u(rng);
      s.geometry = g;
      break;
    }
    default: {
      auto m = [&] { return Matrix2{{{0.01 + u(rng), 0.01 + u(rng)}, {0.01 + u(rng), 0.01 + u(rng)}}}; };
      s.couplings = coupling_table_from(m(), m(), m());
    }
  }
  if (coin(rng)) {
    s.sweep.k = {0.01 + u(rng), 0.05 + u(rng)};
    s.sweep.p0 = {0.1 + 0.3 * u(rng)};
    s.sweep.n = {{10, false}, {1.0, true}, {0.5, true}};
    s.sweep.init = {InitialCondition::Uniform, InitialCondition::RandomIsing};
    s.sweep.rule = {ReductionRule::Global};
    s.sweep.length = {50, 100};
    if (coin(rng)) s.sweep.seeds = {1, 2, rng()};
    else s.sweep.replicates = 3;
    s.sweep.threads = 1 + coin(rng);
  }
  s.output.dir = "out/run" + std::to_string(rng() % 100);
  s.output.prefix = "p" + std::to_string(rng() % 100);
  return s;
}

RunResult sample_result(std::int64_t reductions) {
  RunResult r;
  r.config.k = 0.1;
  r.config.length = 50;
  r.config.p0 = 0.3;
  r.config.n = 650;
  r.config.steps = 100000;
  r.config.seed = 12345678901234ULL;
  r.reductions = reductions;
  r.max_norm_drift = 7.123456789e-10;
  r.energy_drift = 3.3e-10;
  return r;
}

}  // namespace

TEST(Config, MinimalDocumentGetsDefaults) {
  const auto s = parse_config(kMinimal);
  EXPECT_EQ(s.sim.k, 0.1);
  EXPECT_EQ(s.sim.length, 50);
  EXPECT_EQ(s.sim.n, 20);
  EXPECT_EQ(s.sim.p0, 0.3);
  EXPECT_EQ(s.sim.dt, 0.01);
  EXPECT_EQ(s.sim.epsilon, 10.0);
  EXPECT_EQ(s.sim.rule, ReductionRule::Local);
  EXPECT_EQ(s.sim.init, InitialCondition::RandomIsing);
  EXPECT_FALSE(s.geometry);
  EXPECT_FALSE(s.couplings);
  EXPECT_EQ(s.coupling_table(), compute_coupling_table(GeometryParams{}));
}

TEST(Config, P0AboveOneHalfIsRejected) {
  const std::string text = "[reduction]\np0 = 0.6\n";
  EXPECT_EQ(error_line(text), 2);
  EXPECT_NE(error_message(text).find("P0 < 0.5 required"), std::string::npos);
  EXPECT_THROW(parse_config("[reduction]\np0 = 0.5\n[run]\nallow_out_of_range = true\n"), ConfigError);
}

TEST(Config, LineNumberedDiagnostics) {
  EXPECT_EQ(error_line("[lattice]\nlength = 50\ncolour = red\n"), 3);
  EXPECT_EQ(error_line("\n[nonsense]\nx = 1\n"), 3);
  EXPECT_EQ(error_line("[dynamics]\nk = fast\n"), 2);
  EXPECT_EQ(error_line("[dynamics]\nk = 0.1\nk = 0.2\n"), 3);
  EXPECT_EQ(error_line("[dynamics]\nk 0.1\n"), 2);
  EXPECT_EQ(error_line("k = 0.1\n"), 1);
  EXPECT_EQ(error_line("[run]\ninit = XS\n"), 2);
  EXPECT_EQ(error_line("[dynamics]\ndt = -1\n"), 2);
}

TEST(Config, GeometryAndCouplingsAreExclusive) {
  EXPECT_THROW(parse_config("[geometry]\na_long = 8\n[couplings]\nnorth_aa = 0.1\n"), ConfigError);
}

TEST(Config, CouplingsSectionNeedsAllTwelveValues) {
  EXPECT_THROW(parse_config("[couplings]\nnorth_aa = 0.1\n"), ConfigError);
  std::string text = "[couplings]\n";
  for (const char* d : {"north", "upper_east", "lower_east"})
    for (const char* p : {"aa", "ab", "ba", "bb"}) text += std::string(d) + "_" + p + " = 0.2\n";
  const auto s = parse_config(text);
  ASSERT_TRUE(s.couplings);
  EXPECT_EQ(s.couplings->at(Direction::South, Position::Beta, Position::Alpha), 0.2);
}

TEST(Config, InconsistentGeometryRejected) {
  EXPECT_THROW(parse_config("[geometry]\npitch_up = 6\n"), ConfigError);
}

TEST(Config, StudyRangesEnforcedUnlessOverridden) {
  EXPECT_THROW(parse_config("[dynamics]\nk = 5\n"), ConfigError);
  EXPECT_THROW(parse_config("[lattice]\nlength = 4\n"), ConfigError);
  const auto s = parse_config("[dynamics]\nk = 5\n[lattice]\nlength = 4\n[run]\nallow_out_of_range = true\n");
  EXPECT_EQ(s.sim.k, 5.0);
  EXPECT_EQ(s.sim.length, 4);
  // physical validity is never waived
  EXPECT_THROW(parse_config("[dynamics]\nk = -1\n[run]\nallow_out_of_range = true\n"), ConfigError);
}

TEST(Config, ThresholdForms) {
  EXPECT_EQ(parse_config("[lattice]\nlength = 50\n[reduction]\nn = V\n").sim.n, 650);
  EXPECT_EQ(parse_config("[lattice]\nlength = 50\n[reduction]\nn = V/2\n").sim.n, 325);
  EXPECT_EQ(parse_config("[lattice]\nlength = 50\n[reduction]\nn = 0.1V\n").sim.n, 65);
  EXPECT_THROW(parse_config("[reduction]\nn = V/0\n"), ConfigError);
}

TEST(Config, CommandLineOverrides) {
  auto doc = parse_document(kMinimal);
  doc.set("dynamics.k=0.05");
  doc.set("run.seed = 9");
  const auto s = interpret(doc);
  EXPECT_EQ(s.sim.k, 0.05);
  EXPECT_EQ(s.sim.seed, 9u);
  EXPECT_THROW(doc.set("novalue"), ConfigError);
}

TEST(Config, SweepSectionBuildsGrid) {
  const auto s = parse_config(std::string(kMinimal) +
                              "[sweep]\nk = 0.05, 0.1\nn = 10, V\nreplicates = 2\nthreads = 2\n");
  const auto pts = s.grid().points();
  ASSERT_EQ(pts.size(), 8u);
  EXPECT_EQ(pts[2].n, 650);
  EXPECT_NE(pts[0].seed, pts[1].seed);
  EXPECT_EQ(s.grid().threads, 2);
}

TEST(Config, SerializeRoundTripProperty) {
  std::mt19937_64 rng(123);
  for (int i = 0; i < 300; ++i) {
    const RunSetup s = random_setup(rng);
    const std::string text = serialize(s);
    RunSetup back;
    ASSERT_NO_THROW(back = parse_config(text)) << text;
    ASSERT_EQ(back, s) << text;
    EXPECT_EQ(serialize(back), text);
  }
}

TEST(Io, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Io, ManifestIsDeterministic) {
  const auto s = parse_config(kMinimal);
  const auto a = make_manifest(s, "run");
  const auto b = make_manifest(s, "run");
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_EQ(a.text(), b.text());
  EXPECT_EQ(a.hash.size(), 16u);
  auto t = s;
  t.sim.seed = 2;
  EXPECT_NE(make_manifest(t, "run").hash, a.hash);
  EXPECT_EQ(a.doc["generator"], "mt19937_64");
}

TEST(Io, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Io, ResultsCsvRoundTrip) {
  std::ostringstream out;
  write_preamble(out, "0123456789abcdef", 10.0);
  write_results_header(out);
  write_result_row(out, sample_result(37));
  write_result_row(out, sample_result(0));
  std::istringstream in(out.str());
  const auto f = read_results(in);
  EXPECT_EQ(f.manifest_hash, "0123456789abcdef");
  EXPECT_EQ(f.epsilon, 10.0);
  ASSERT_EQ(f.rows.size(), 2u);
  EXPECT_EQ(f.rows[0].reductions, 37);
  EXPECT_EQ(f.rows[0].tau_t0, 1000.0 / 37);
  EXPECT_EQ(f.rows[0].seed, 12345678901234ULL);
  EXPECT_EQ(f.rows[0].max_norm_drift, 7.123456789e-10);
  EXPECT_FALSE(f.rows[0].censored);
  EXPECT_TRUE(f.rows[1].censored);
  EXPECT_FALSE(f.rows[1].tau_t0);
  EXPECT_NE(out.str().find(",,1,"), std::string::npos);
}

TEST(Io, ResultsReaderRejectsMalformedInput) {
  std::istringstream none("# manifest=x\n");
  EXPECT_THROW(read_results(none), std::runtime_error);
  std::istringstream bad(std::string(kResultsHeader) + "\n1,2,3\n");
  EXPECT_THROW(read_results(bad), std::runtime_error);
}

TEST(Io, CouplingCsvListsEveryPair) {
  std::ostringstream out;
  write_coupling_csv(out, compute_coupling_table(GeometryParams{}));
  const std::string s = out.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 25);
  EXPECT_NE(s.find("N,alpha,beta,4,0.25\n"), std::string::npos);
}

TEST(Io, EventAndTrajectoryRows) {
  std::ostringstream out;
  write_events_header(out);
  write_event_row(out, {12, 0.12, ReductionRule::Global, 40, 1.0});
  write_trajectory_header(out);
  StateVector s(2);
  s.set_pure(1, Position::Beta);
  write_trajectory_rows(out, 5, s);
  EXPECT_EQ(out.str(),
            "step,t_R_t0,rule,cluster_size,outcome_alpha_fraction\n12,0.12,GR,40,1\n"
            "step,site,occupation\n5,0,1\n5,1,0\n");
}
