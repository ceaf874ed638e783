#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "attacksearch/bench.hpp"
#include "attacksearch/run_config.hpp"

namespace fs = std::filesystem;
using namespace attacksearch;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("attacksearch-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) { return std::system((std::string(ATTACKSEARCH_CLI) + " " + args + " > /dev/null 2>&1").c_str()); }

std::string trial_json(const std::string& task, const std::string& method, std::size_t trial, double u) {
  std::ostringstream os;
  os << R"({"task":")" << task << R"(","method":")" << method << R"(","round":)" << trial << R"(,"trial":)" << trial
     << R"(,"phase":"scout","config":"c)" << trial << R"(","D":0.5,"F":0.5,"T":1,"V":0,"U":)" << u
     << R"(,"episodes":2,"seed":0})" << '\n';
  return os.str();
}

}  // namespace

TEST(RunConfig, MinimalFileGetsDefaults) {
  const auto cfg = parse_run_config_text("mode = oracle\n[victim]\nkind = surface\n");
  RunConfig expect;
  expect.mode = Mode::Oracle;
  EXPECT_EQ(cfg, expect);
}

TEST(RunConfig, EmitParseRoundTrip) {
  RunConfig cfg;
  EXPECT_EQ(parse_run_config_text(emit_run_config(cfg)), cfg);
  cfg.mode = Mode::Bench;
  cfg.victim.kind = VictimKind::Linear;
  cfg.victim.noise = 0.25;
  cfg.search.alpha = 0.3;
  cfg.search.alpha_schedule = AlphaSchedule::Harmonic;
  cfg.rgar.retrieval.lambda = 0.125;
  cfg.rhos = {0.5, 0.75};
  cfg.report_logs = {"a.jsonl", "b.jsonl"};
  EXPECT_EQ(parse_run_config_text(emit_run_config(cfg)), cfg);
}

TEST(RunConfig, LambdaOutOfRangeNamesKeyAndLine) {
  try {
    (void)parse_run_config_text("mode = search\n\n[rgar]\nlambda = 1.5\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    const std::string what = e.what();
    EXPECT_NE(what.find("rgar.lambda"), std::string::npos) << what;
    EXPECT_NE(what.find("[0, 1]"), std::string::npos) << what;
  }
}

TEST(RunConfig, UnknownKeyAndTypeMismatch) {
  try {
    (void)parse_run_config_text("[search]\nbudget = 16\nbogus = 1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("search.bogus"), std::string::npos);
  }
  try {
    (void)parse_run_config_text("[search]\nbudget = many\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("search.budget"), std::string::npos);
  }
}

TEST(RunConfig, EmptyGridRejected) {
  EXPECT_THROW(parse_run_config_text("[space]\napgd-ce.eps =\n"), ParseError);
}

TEST(Report, ConstructedLogHitsAtTrialThree) {
  std::string log;
  for (const auto* task : {"a", "b"}) {
    log += trial_json(task, "m", 1, 0.1);
    log += trial_json(task, "m", 2, 0.5);
    log += trial_json(task, "m", 3, 0.95);
    log += trial_json(task, "m", 4, 1.0);
  }
  std::istringstream is(log);
  const auto rows = threshold_efficiency(trace_pairs(read_trial_log(is)));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].pairs, 2u);
  EXPECT_EQ(rows[0].hit_rate, 1.0);
  EXPECT_EQ(rows[0].mean_trials, 3.0);
}

TEST(Report, NegativeFinalNeverHits) {
  std::string log = trial_json("a", "m", 1, -0.5) + trial_json("a", "m", 2, -0.2);
  std::istringstream is(log);
  const auto rows = threshold_efficiency(trace_pairs(read_trial_log(is)));
  EXPECT_EQ(rows[0].hit_rate, 0.0);
}

TEST(Report, BadLineNamed) {
  std::istringstream is(trial_json("a", "m", 1, 0.1) + "garbage\n");
  try {
    (void)read_trial_log(is);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Bench, NoiselessFamilyOrderingAndParity) {
  BenchSettings b;
  b.noise = 0.0;
  const auto out = run_bench(default_space(), SearchParams{}, b, {}, {});
  double wm = 0.0, rnd = 0.0;
  std::map<std::string, std::set<std::size_t>> counts;
  for (const auto& c : out.cells) {
    counts[c.task].insert(c.evaluated);
    if (c.method == Method::WMAttack) wm += c.final_best;
    if (c.method == Method::Random) rnd += c.final_best;
  }
  EXPECT_GE(wm, rnd);
  for (const auto& [task, n] : counts) EXPECT_EQ(n.size(), 1u) << task;
}

TEST(Cli, SearchIsDeterministicAndWritesArtifacts) {
  const auto dir = scratch("search");
  {
    std::ofstream os(dir / "run.cfg");
    os << "mode = search\n[victim]\nkind = surface\nnoise = 0.05\ntask_seed = 3\n[search]\nseed = 9\n[output]\ndir = "
       << (dir / "a").string() << "\n";
  }
  ASSERT_EQ(run_cli("search --config " + (dir / "run.cfg").string()), 0);
  ASSERT_EQ(run_cli("search --config " + (dir / "run.cfg").string() + " --out " + (dir / "b").string()), 0);
  EXPECT_EQ(slurp(dir / "a" / "trials.jsonl"), slurp(dir / "b" / "trials.jsonl"));
  EXPECT_FALSE(slurp(dir / "a" / "trials.jsonl").empty());
  EXPECT_NE(slurp(dir / "a" / "result.json").find("best_config"), std::string::npos);
}

TEST(Cli, OracleTheoryReportAndMemory) {
  const auto dir = scratch("modes");
  {
    std::ofstream os(dir / "run.cfg");
    os << "[victim]\nkind = surface\ntask_seed = 2\n[theory]\nhitting_trials = 2000\ncoverage_trials = 60\n[rgar]\nmemory = "
       << (dir / "memory.jsonl").string() << "\n";
  }
  const auto cfg = (dir / "run.cfg").string();
  ASSERT_EQ(run_cli("oracle --config " + cfg + " --out " + dir.string()), 0);
  EXPECT_NE(slurp(dir / "utility_map.csv").find("index,config,D,F,T,V,U"), std::string::npos);
  ASSERT_EQ(run_cli("theory --config " + cfg + " --out " + dir.string()), 0);
  EXPECT_EQ(slurp(dir / "theory.csv").find("FAIL"), std::string::npos);
  ASSERT_EQ(run_cli("memory --config " + cfg), 0);
  ASSERT_EQ(run_cli("memory --config " + cfg + " --seed 4"), 0);
  EXPECT_EQ(AttackMemory::load((dir / "memory.jsonl").string()).size(), 2u);

  {
    std::ofstream os(dir / "log.jsonl");
    os << trial_json("a", "m", 1, 0.2) << trial_json("a", "m", 2, 0.9);
    std::ofstream rc(dir / "report.cfg");
    rc << "[report]\nlogs = " << (dir / "log.jsonl").string() << "\n";
  }
  ASSERT_EQ(run_cli("report --config " + (dir / "report.cfg").string() + " --out " + (dir / "r1").string()), 0);
  ASSERT_EQ(run_cli("report --config " + (dir / "report.cfg").string() + " --out " + (dir / "r2").string()), 0);
  EXPECT_EQ(slurp(dir / "r1" / "table1.csv"), slurp(dir / "r2" / "table1.csv"));
  EXPECT_EQ(slurp(dir / "r1" / "table2.csv"), slurp(dir / "r2" / "table2.csv"));
  EXPECT_NE(slurp(dir / "r1" / "table1.csv").find("Task,Method,Drop,Flip,Utility,Time"), std::string::npos);
  EXPECT_NE(slurp(dir / "r1" / "table2.csv").find("Method,Pairs,Hit Rate,Trials,Time"), std::string::npos);
  EXPECT_NE(run_cli("report --out " + dir.string()), 0);
}
