#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "attacksearch/memory.hpp"
#include "attacksearch/search.hpp"
#include "attacksearch/theory.hpp"

namespace attacksearch {

/// Compared search strategies, all run under the same budget.
enum class Method { WMAttack, FeedbackOnly, Random };

constexpr std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::WMAttack: return "wmattack";
    case Method::FeedbackOnly: return "feedback-only";
    case Method::Random: return "random";
  }
  return "?";
}

inline constexpr std::array kAllMethods{Method::WMAttack, Method::FeedbackOnly, Method::Random};

struct RetrievalParams {
  std::size_t k = 3;
  double lambda = 0.6;
  bool operator==(const RetrievalParams&) const = default;
};

/// Family of response-surface tasks whose theta is drawn from one seed.
inline std::vector<ResponseSurfaceParams> surface_family(std::size_t count, std::uint64_t family_seed, double noise) {
  std::vector<ResponseSurfaceParams> tasks;
  tasks.reserve(count);
  const Rng root(family_seed);
  for (std::size_t i = 0; i < count; ++i) {
    auto r = root.split(i);
    ResponseSurfaceParams p;
    p.task_id = "task-" + std::to_string(i);
    p.theta = {r.uniform(), r.uniform(), r.uniform()};
    p.noise = noise;
    tasks.push_back(p);
  }
  return tasks;
}

/// Summary of a victim's clean behavior.
inline TaskSummary summarize_victim(const Victim& victim, std::size_t episodes, Rng rng) {
  return summarize(victim.clean_rollout(episodes, rng.split("summary")), victim.descriptor());
}

/// Record of the population-best configuration of a response-surface task.
inline MemoryRecord oracle_record(const ResponseSurfaceVictim& victim, const ConfigSpace& space,
                                  const UtilityWeights& weights, std::size_t summary_episodes = 4) {
  const auto umap = analytic_utility_map(victim, space, weights);
  const auto& best = umap.configs[umap.argmax];
  MemoryRecord rec;
  rec.task_id = victim.descriptor().task_id;
  rec.psi = summarize_victim(victim, summary_episodes, Rng(0)).psi;
  rec.config = best;
  rec.utility = umap.u_star;
  rec.d = victim.j_clean() * victim.expected_drop(best) / (std::abs(victim.j_clean()) + 1.0);
  rec.f = victim.flip_probability(best);
  return rec;
}

/// Initial proposal for a method: retrieval warm start for WMAttack, uniform otherwise.
inline ProposalDistribution initial_proposal(Method method, const Victim& victim, const ConfigSpace& space,
                                             const AttackMemory* memory, const RetrievalParams& rp,
                                             std::size_t summary_episodes = 4) {
  auto base = ProposalDistribution::uniform(space.size());
  if (method != Method::WMAttack || memory == nullptr || memory->empty()) return base;
  const auto psi = summarize_victim(victim, summary_episodes, Rng(0)).psi;
  const auto hits = retrieve_topk(*memory, psi, rp.k);
  return warm_start(base, hits, rp.lambda, space).q0;
}

inline SearchResult run_method(Method method, const Victim& victim, const ConfigSpace& space, SearchParams params,
                               const AttackMemory* memory, const RetrievalParams& rp, const CleanBaseline& baseline,
                               const UtilityWeights& weights) {
  params.refine = method != Method::Random;
  const auto q0 = initial_proposal(method, victim, space, memory, rp);
  return run_search(victim, space, params, q0, baseline, weights);
}

struct BenchSettings {
  std::size_t tasks = 10;
  std::size_t memory_tasks = 20;
  std::uint64_t family_seed = 7;
  double noise = 0.02;
  bool operator==(const BenchSettings&) const = default;
};

struct BenchCell {
  std::string task;
  Method method = Method::WMAttack;
  std::size_t evaluated = 0;
  double first_round_best = 0.0;
  double final_best = 0.0;       // best effective estimate
  double population_best = 0.0;  // population utility of the returned config
};

struct BenchOutcome {
  std::string trial_log;
  std::vector<BenchCell> cells;  // task-major, method order of kAllMethods
};

/// Builds an oracle memory from the first memory_tasks tasks of a surface
/// family, then searches each remaining task with every method under the same
/// budget and seed.
inline BenchOutcome run_bench(const ConfigSpace& space, const SearchParams& params, const BenchSettings& bench,
                              const RetrievalParams& rp, const UtilityWeights& weights, std::size_t baseline_episodes = 4) {
  const auto family = surface_family(bench.memory_tasks + bench.tasks, bench.family_seed, bench.noise);
  AttackMemory memory(kSummaryFeatures);
  for (std::size_t i = 0; i < bench.memory_tasks; ++i) memory.insert(oracle_record(ResponseSurfaceVictim(family[i]), space, weights));
  memory.refresh_normalization();

  BenchOutcome out;
  out.cells.resize(bench.tasks * kAllMethods.size());
  std::vector<std::string> logs(out.cells.size());
  parallel_for(out.cells.size(), [&](std::size_t cell) {
    const std::size_t task = cell / kAllMethods.size();
    const Method method = kAllMethods[cell % kAllMethods.size()];
    const ResponseSurfaceVictim victim(family[bench.memory_tasks + task]);
    auto p = params;
    p.seed = mix64(params.seed ^ mix64(task + 1));
    const auto baseline = measure_baseline(victim, baseline_episodes, Rng(p.seed));
    const auto res = run_method(method, victim, space, p, &memory, rp, baseline, weights);
    const auto population = analytic_utility_map(victim, space, weights);
    auto& c = out.cells[cell];
    c.task = victim.descriptor().task_id;
    c.method = method;
    c.evaluated = res.history.entries.size();
    c.first_round_best = res.history.best_per_round.front();
    c.final_best = res.best_report.u;
    c.population_best = population.utilities[*space.index_of(res.best_config)];
    std::ostringstream os;
    write_history(os, res.history, c.task, std::string(to_string(method)));
    logs[cell] = os.str();
  });
  for (const auto& l : logs) out.trial_log += l;
  return out;
}

// ---------------------------------------------------------------------------
// Reports over trial logs.

struct TrialLine {
  std::string task, method, phase, config;
  std::size_t round = 0, trial = 0, episodes = 0;
  double d = 0, f = 0, t = 0, v = 0, u = 0;
};

inline std::vector<TrialLine> read_trial_log(std::istream& is) {
  std::vector<TrialLine> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TrialLine t;
      t.task = j.value("task", std::string{});
      t.method = j.value("method", std::string{});
      t.phase = j.at("phase").get<std::string>();
      t.config = j.at("config").get<std::string>();
      t.round = j.at("round").get<std::size_t>();
      t.trial = j.value("trial", std::size_t{0});
      t.episodes = j.at("episodes").get<std::size_t>();
      t.d = j.at("D").get<double>();
      t.f = j.at("F").get<double>();
      t.t = j.at("T").get<double>();
      t.v = j.at("V").get<double>();
      t.u = j.at("U").get<double>();
      out.push_back(std::move(t));
    } catch (const std::exception& e) {
      throw ParseError(lineno, std::string("bad trial record: ") + e.what());
    }
  }
  return out;
}

struct PairTrace {
  std::vector<double> best_so_far;   // per trial
  std::vector<double> elapsed;       // cumulative virtual seconds after each trial
  TrialLine best;                    // effective record of the best trial
};

/// Best-so-far effective utility per trial for every (task, method) pair.
inline std::map<std::pair<std::string, std::string>, PairTrace> trace_pairs(const std::vector<TrialLine>& lines) {
  // Effective line per (pair, trial): confirm replaces scout.
  std::map<std::pair<std::string, std::string>, std::map<std::size_t, TrialLine>> eff;
  std::map<std::pair<std::string, std::string>, std::map<std::size_t, double>> seconds;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    const auto key = std::pair{l.task, l.method};
    const std::size_t trial = l.trial ? l.trial : i + 1;
    seconds[key][trial] += l.t * static_cast<double>(l.episodes);
    auto& slot = eff[key];
    auto it = slot.find(trial);
    if (it == slot.end() || l.phase == "confirm") slot[trial] = l;
  }
  std::map<std::pair<std::string, std::string>, PairTrace> out;
  for (const auto& [key, trials] : eff) {
    PairTrace tr;
    double best = -std::numeric_limits<double>::infinity();
    double clock = 0.0;
    for (const auto& [trial, l] : trials) {
      clock += seconds[key][trial];
      if (l.u > best) {
        best = l.u;
        tr.best = l;
      }
      tr.best_so_far.push_back(best);
      tr.elapsed.push_back(clock);
    }
    out[key] = std::move(tr);
  }
  return out;
}

struct ThresholdRow {
  std::string method;
  std::size_t pairs = 0;
  double hit_rate = 0.0;
  double mean_trials = 0.0;  // among hitting pairs
  double mean_time = 0.0;    // virtual seconds to threshold, among hitting pairs
};

/// Per method: fraction of task-method pairs whose best-so-far reaches 90% of
/// the pair's own final best utility. Pairs whose final best is not positive
/// never count as hits.
inline std::vector<ThresholdRow> threshold_efficiency(const std::map<std::pair<std::string, std::string>, PairTrace>& traces,
                                                      double fraction = 0.9) {
  std::map<std::string, ThresholdRow> rows;
  std::map<std::string, std::size_t> hits;
  for (const auto& [key, tr] : traces) {
    auto& row = rows[key.second];
    row.method = key.second;
    ++row.pairs;
    const double ref = tr.best_so_far.back();
    if (!(ref > 0.0)) continue;
    for (std::size_t i = 0; i < tr.best_so_far.size(); ++i) {
      if (tr.best_so_far[i] >= fraction * ref) {
        ++hits[key.second];
        row.mean_trials += static_cast<double>(i + 1);
        row.mean_time += tr.elapsed[i];
        break;
      }
    }
  }
  std::vector<ThresholdRow> out;
  for (auto& [method, row] : rows) {
    const auto h = hits[method];
    row.hit_rate = static_cast<double>(h) / static_cast<double>(row.pairs);
    if (h > 0) {
      row.mean_trials /= static_cast<double>(h);
      row.mean_time /= static_cast<double>(h);
    }
    out.push_back(row);
  }
  return out;
}

/// Table with columns Task,Method,Drop,Flip,Utility,Time plus per-method averages.
inline void write_main_table(std::ostream& os, const std::map<std::pair<std::string, std::string>, PairTrace>& traces) {
  os << "Task,Method,Drop,Flip,Utility,Time\n";
  struct Acc {
    double d = 0, f = 0, u = 0, t = 0;
    std::size_t n = 0;
  };
  std::map<std::string, Acc> avg;
  for (const auto& [key, tr] : traces) {
    const auto& b = tr.best;
    const double time = tr.elapsed.back();
    os << key.first << ',' << key.second << ',' << format_fixed(b.d, 3) << ',' << format_fixed(b.f, 3) << ','
       << format_fixed(b.u, 3) << ',' << format_fixed(time, 3) << '\n';
    auto& a = avg[key.second];
    a.d += b.d;
    a.f += b.f;
    a.u += b.u;
    a.t += time;
    ++a.n;
  }
  for (const auto& [method, a] : avg) {
    const double n = static_cast<double>(a.n);
    os << "Average," << method << ',' << format_fixed(a.d / n, 3) << ',' << format_fixed(a.f / n, 3) << ','
       << format_fixed(a.u / n, 3) << ',' << format_fixed(a.t / n, 3) << '\n';
  }
}

inline void write_threshold_table(std::ostream& os, const std::vector<ThresholdRow>& rows) {
  os << "# Hit Rate: fraction of pairs reaching 90% of their own final best utility; "
        "Trials and Time (virtual seconds) are means over hitting pairs\n";
  os << "Method,Pairs,Hit Rate,Trials,Time\n";
  for (const auto& r : rows)
    os << r.method << ',' << r.pairs << ',' << format_fixed(r.hit_rate, 3) << ',' << format_fixed(r.mean_trials, 3) << ','
       << format_fixed(r.mean_time, 3) << '\n';
}

}  // namespace attacksearch
