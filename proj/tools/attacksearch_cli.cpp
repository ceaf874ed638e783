// Command-line front end: attacksearch <mode> --config <path> [--out <dir>] [--seed <u64>]

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "attacksearch/attacksearch.hpp"
#include "attacksearch/bench.hpp"
#include "attacksearch/run_config.hpp"
#include "attacksearch/theory_checks.hpp"

namespace fs = std::filesystem;
using namespace attacksearch;

namespace {

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  const auto path = fs::path(cfg.out_dir) / name;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

std::optional<AttackMemory> load_memory(const RunConfig& cfg) {
  if (!cfg.rgar.enabled || cfg.rgar.memory.empty() || !fs::exists(cfg.rgar.memory)) return std::nullopt;
  return AttackMemory::load(cfg.rgar.memory);
}

int cmd_search(const RunConfig& cfg) {
  const auto victim = make_victim(cfg.victim);
  const auto space = cfg.space();
  const Rng root(cfg.search.seed);
  const auto baseline = measure_baseline(*victim, cfg.baseline_episodes, root.split("baseline"));
  const auto summary = summarize(baseline.rollouts, victim->descriptor());
  auto memory = load_memory(cfg);

  auto q0 = ProposalDistribution::uniform(space.size());
  std::size_t retrieved = 0;
  if (memory && !memory->empty()) {
    const auto hits = retrieve_topk(*memory, summary.psi, cfg.rgar.retrieval.k);
    const auto ws = warm_start(q0, hits, cfg.rgar.retrieval.lambda, space);
    q0 = ws.q0;
    retrieved = hits.size() - ws.skipped;
    if (ws.skipped) std::cerr << "warning: " << ws.skipped << " retrieved configs are outside the space\n";
  }
  const auto res = run_search(*victim, space, cfg.search, q0, baseline, cfg.weights);
  for (const auto& w : res.history.warnings) std::cerr << "warning: " << w << '\n';

  auto log = open_out(cfg, "trials.jsonl");
  write_history(log, res.history, victim->descriptor().task_id, "wmattack");
  auto summary_out = open_out(cfg, "result.json");
  const auto& b = res.best_report;
  summary_out << "{\"task\":\"" << json_escape(victim->descriptor().task_id) << "\",\"best_config\":\"" << to_string(b.config)
              << "\",\"U\":" << format_real(b.u) << ",\"D\":" << format_real(b.d) << ",\"F\":" << format_real(b.f)
              << ",\"T\":" << format_real(b.t) << ",\"V\":" << format_real(b.v) << ",\"rounds\":" << res.history.rounds
              << ",\"evaluated\":" << res.history.entries.size() << ",\"episodes\":" << res.history.episodes
              << ",\"virtual_seconds\":" << format_real(res.history.virtual_seconds)
              << ",\"baseline_seconds\":" << format_real(baseline.seconds) << ",\"retrieved\":" << retrieved << "}\n";

  if (cfg.rgar.insert && !cfg.rgar.memory.empty()) {
    AttackMemory m = memory ? *memory : (fs::exists(cfg.rgar.memory) ? AttackMemory::load(cfg.rgar.memory) : AttackMemory(kSummaryFeatures));
    m.insert({victim->descriptor().task_id, summary.psi, b.config, b.u, b.d, b.f, 0});
    m.save(cfg.rgar.memory);
  }
  std::cout << "best " << to_string(b.config) << " U=" << format_fixed(b.u, 4) << " D=" << format_fixed(b.d, 4)
            << " F=" << format_fixed(b.f, 4) << " after " << res.history.entries.size() << " configs in "
            << res.history.rounds << " rounds\n";
  return 0;
}

int cmd_oracle(const RunConfig& cfg) {
  const auto victim = make_victim(cfg.victim);
  const auto space = cfg.space();
  const Rng root(cfg.search.seed);
  const auto baseline = measure_baseline(*victim, cfg.baseline_episodes, root.split("baseline"));
  std::optional<std::size_t> averaging;
  if (!victim->deterministic()) averaging = cfg.search.scout.confirm_episodes;
  const auto map = brute_force_utility(*victim, space, baseline, cfg.weights, averaging, root.split("oracle"));
  auto os = open_out(cfg, "utility_map.csv");
  os << "index,config,D,F,T,V,U\n";
  for (std::size_t i = 0; i < map.size(); ++i) {
    const auto& r = map.reports[i];
    os << i << ',' << to_string(r.config) << ',' << format_real(r.d) << ',' << format_real(r.f) << ',' << format_real(r.t)
       << ',' << format_real(r.v) << ',' << format_real(r.u) << '\n';
  }
  std::cout << "argmax " << to_string(map.configs[map.argmax]) << " U*=" << format_fixed(map.u_star, 6) << " over "
            << map.size() << " configs\n";
  if (const auto* surface = dynamic_cast<const ResponseSurfaceVictim*>(victim.get()); surface && surface->deterministic()) {
    const auto analytic = analytic_utility_map(*surface, space, cfg.weights);
    double worst = 0.0;
    for (std::size_t i = 0; i < map.size(); ++i) worst = std::max(worst, std::abs(analytic.utilities[i] - map.utilities[i]));
    std::cout << "nested-loop cross-check max |dU| = " << format_real(worst) << '\n';
    if (worst > 1e-12) return 1;
  }
  return 0;
}

int cmd_theory(const RunConfig& cfg) {
  TheoryCheckSettings s;
  s.hitting_trials = cfg.theory.hitting_trials;
  s.coverage_trials = cfg.theory.coverage_trials;
  s.coverage_episodes = cfg.theory.coverage_episodes;
  s.delta = cfg.theory.delta;
  s.seed = cfg.search.seed;
  const auto checks = run_theory_checks(s);
  auto os = open_out(cfg, "theory.csv");
  write_theory_table(os, checks);
  write_theory_table(std::cout, checks);
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; }) ? 0 : 1;
}

void write_reports(const RunConfig& cfg, const std::vector<TrialLine>& lines) {
  const auto traces = trace_pairs(lines);
  auto t1 = open_out(cfg, "table1.csv");
  write_main_table(t1, traces);
  auto t2 = open_out(cfg, "table2.csv");
  write_threshold_table(t2, threshold_efficiency(traces));
}

int cmd_bench(const RunConfig& cfg) {
  const auto space = cfg.space();
  const auto outcome = run_bench(space, cfg.search, cfg.bench, cfg.rgar.retrieval, cfg.weights, cfg.baseline_episodes);
  {
    auto log = open_out(cfg, "trials.jsonl");
    log << outcome.trial_log;
  }
  std::istringstream is(outcome.trial_log);
  write_reports(cfg, read_trial_log(is));
  std::map<std::string, std::set<std::size_t>> counts;
  std::map<Method, double> mean_best;
  for (const auto& c : outcome.cells) {
    counts[c.task].insert(c.evaluated);
    mean_best[c.method] += c.population_best / static_cast<double>(cfg.bench.tasks);
  }
  bool parity = true;
  for (const auto& [task, n] : counts) parity = parity && n.size() == 1;
  for (auto m : kAllMethods) std::cout << to_string(m) << " mean population utility of best = " << format_fixed(mean_best[m], 4) << '\n';
  std::cout << "budget parity: " << (parity ? "PASS" : "FAIL") << '\n';
  return parity ? 0 : 1;
}

int cmd_memory(const RunConfig& cfg) {
  if (cfg.rgar.memory.empty()) throw std::runtime_error("memory mode needs rgar.memory");
  AttackMemory m = fs::exists(cfg.rgar.memory) ? AttackMemory::load(cfg.rgar.memory) : AttackMemory(kSummaryFeatures);
  const auto victim = make_victim(cfg.victim);
  const auto space = cfg.space();
  if (const auto* surface = dynamic_cast<const ResponseSurfaceVictim*>(victim.get())) {
    m.insert(oracle_record(*surface, space, cfg.weights, cfg.baseline_episodes));
  } else {
    const Rng root(cfg.search.seed);
    const auto baseline = measure_baseline(*victim, cfg.baseline_episodes, root.split("baseline"));
    const auto map = brute_force_utility(*victim, space, baseline, cfg.weights, cfg.search.scout.confirm_episodes, root.split("oracle"));
    const auto& r = map.reports[map.argmax];
    m.insert({victim->descriptor().task_id, summarize(baseline.rollouts, victim->descriptor()).psi, r.config, r.u, r.d, r.f, 0});
  }
  m.save(cfg.rgar.memory);
  std::cout << "memory " << cfg.rgar.memory << ": " << m.size() << " records\n";
  for (const auto& r : m.records())
    std::cout << "  " << r.ts << ' ' << r.task_id << ' ' << to_string(r.config) << " U=" << format_fixed(r.utility, 4) << '\n';
  return 0;
}

int cmd_report(const RunConfig& cfg) {
  if (cfg.report_logs.empty()) throw std::runtime_error("report mode needs report.logs");
  std::vector<TrialLine> lines;
  for (const auto& path : cfg.report_logs) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read trial log " + path);
    auto part = read_trial_log(is);
    lines.insert(lines.end(), part.begin(), part.end());
  }
  write_reports(cfg, lines);
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "table1.csv").string() << " and table2.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-budget attack-configuration search"};
  std::string mode, config_path, out_dir;
  std::uint64_t seed = 0;
  bool emit_defaults = false;
  app.add_option("mode", mode, "search | oracle | theory | bench | memory | report")
      ->check(CLI::IsMember({"search", "oracle", "theory", "bench", "memory", "report"}));
  app.add_option("--config", config_path, "run-configuration file");
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  auto* seed_opt = app.add_option("--seed", seed, "search seed (overrides search.seed)");
  app.add_flag("--emit-defaults", emit_defaults, "print the default run configuration and exit");
  CLI11_PARSE(app, argc, argv);

  if (emit_defaults) {
    std::cout << emit_run_config({});
    return 0;
  }
  if (mode.empty()) {
    std::cerr << "a mode is required\n" << app.help();
    return 2;
  }
  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : parse_run_config(config_path);
    cfg.mode = *parse_mode(mode);
    if (*out_opt) cfg.out_dir = out_dir;
    if (*seed_opt) cfg.search.seed = seed;
    switch (cfg.mode) {
      case Mode::Search: return cmd_search(cfg);
      case Mode::Oracle: return cmd_oracle(cfg);
      case Mode::Theory: return cmd_theory(cfg);
      case Mode::Bench: return cmd_bench(cfg);
      case Mode::Memory: return cmd_memory(cfg);
      case Mode::Report: return cmd_report(cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
