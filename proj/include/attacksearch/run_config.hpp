#pragma once

#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "attacksearch/bench.hpp"
#include "attacksearch/linear_victim.hpp"
#include "attacksearch/response_surface.hpp"
#include "attacksearch/search.hpp"

namespace attacksearch {

enum class Mode { Search, Oracle, Theory, Bench, Memory, Report };
enum class VictimKind { Surface, Linear };

constexpr std::string_view to_string(Mode m) noexcept {
  switch (m) {
    case Mode::Search: return "search";
    case Mode::Oracle: return "oracle";
    case Mode::Theory: return "theory";
    case Mode::Bench: return "bench";
    case Mode::Memory: return "memory";
    case Mode::Report: return "report";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  for (auto m : {Mode::Search, Mode::Oracle, Mode::Theory, Mode::Bench, Mode::Memory, Mode::Report})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

struct VictimSpec {
  VictimKind kind = VictimKind::Surface;
  std::uint64_t task_seed = 0;
  std::string task_id;         // empty: derived from kind and seed
  std::vector<double> theta;   // surface only; empty: drawn from task_seed
  double noise = 0.0;          // surface only
  double j_clean = 100.0;      // surface only
  std::size_t horizon = 0;     // 0: kind default (surface 20, linear 40)
  std::size_t obs_dim = 64;    // linear only
  std::size_t latent_dim = 6;
  ActionKind action = ActionKind::Discrete;  // linear only
  bool operator==(const VictimSpec&) const = default;
};

struct RgarSettings {
  bool enabled = true;
  std::string memory;  // path; empty: no memory
  RetrievalParams retrieval;
  bool insert = false;
  bool operator==(const RgarSettings&) const = default;
};

struct TheorySettings {
  std::size_t hitting_trials = 20000;
  std::size_t coverage_trials = 500;
  std::size_t coverage_episodes = 50;
  double delta = 0.1;
  bool operator==(const TheorySettings&) const = default;
};

/// Everything one CLI invocation needs. Defaults are the documented values.
struct RunConfig {
  Mode mode = Mode::Search;
  VictimSpec victim;
  std::vector<AttackFamily> families{kAllFamilies.begin(), kAllFamilies.end()};
  std::map<AttackFamily, FamilyGrid> grids = [] {
    std::map<AttackFamily, FamilyGrid> g;
    for (auto f : kAllFamilies) g[f] = default_grid(f);
    return g;
  }();
  std::vector<int> restarts{1};
  std::vector<double> rhos{0.75};
  std::vector<std::uint64_t> seeds{0};
  std::vector<AllocationRule> allocations{AllocationRule::Fixed, AllocationRule::MarginLinear};
  SearchParams search;
  std::size_t baseline_episodes = 4;
  RgarSettings rgar;
  UtilityWeights weights;
  BenchSettings bench;
  TheorySettings theory;
  std::vector<std::string> report_logs;
  std::string out_dir = "out";

  bool operator==(const RunConfig&) const = default;

  [[nodiscard]] ConfigSpace space() const {
    std::vector<FamilyGrid> gs;
    for (auto f : families) {
      auto g = grids.at(f);
      g.restarts = restarts;
      g.rhos = rhos;
      g.seeds = seeds;
      g.allocations = allocations;
      gs.push_back(std::move(g));
    }
    return ConfigSpace(std::move(gs));
  }
};

inline std::unique_ptr<Victim> make_victim(const VictimSpec& v) {
  if (v.kind == VictimKind::Surface) {
    auto p = surface_task_from_seed(v.task_seed, v.noise);
    if (v.theta.size() == 3) p.theta = {v.theta[0], v.theta[1], v.theta[2]};
    if (!v.task_id.empty()) p.task_id = v.task_id;
    p.j_clean = v.j_clean;
    if (v.horizon) p.horizon = v.horizon;
    p.latent_dim = v.latent_dim;
    return std::make_unique<ResponseSurfaceVictim>(p);
  }
  LinearVictimParams p;
  p.task_seed = v.task_seed;
  p.task_id = v.task_id.empty() ? "linear-" + std::to_string(v.task_seed) : v.task_id;
  p.obs_dim = v.obs_dim;
  p.latent_dim = v.latent_dim;
  if (v.horizon) p.horizon = v.horizon;
  p.action_kind = v.action;
  return std::make_unique<LinearWorldModelVictim>(p);
}

namespace detail {

template <typename T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + f(v[i]);
  return s;
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const auto c = s.find(',', pos);
    out.push_back(trim(s.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos)));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

inline std::string bool_str(bool b) { return b ? "true" : "false"; }

/// One configuration key: how to read it and how to write it back.
struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;  // throws std::string on bad value
  std::function<std::string(const RunConfig&)> get;
};

[[noreturn]] inline void bad(const std::string& why) { throw why; }

template <typename Int>
Int to_int(std::string_view v, Int min_value) {
  Int x{};
  if (!parse_int(v, x)) bad("expected an integer, got '" + std::string(v) + "'");
  if (x < min_value) bad("must be >= " + std::to_string(min_value));
  return x;
}

inline double to_real(std::string_view v) {
  double x = 0.0;
  if (!parse_real(v, x) || !std::isfinite(x)) bad("expected a real number, got '" + std::string(v) + "'");
  return x;
}

inline double to_real_in(std::string_view v, double lo, double hi, const char* range) {
  const double x = to_real(v);
  if (!(x >= lo && x <= hi)) bad(std::string("must lie in ") + range);
  return x;
}

inline bool to_bool(std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad("expected true or false, got '" + std::string(v) + "'");
}

template <typename T, typename Parse>
std::vector<T> to_list(std::string_view v, Parse parse) {
  std::vector<T> out;
  for (auto item : split_list(v)) out.push_back(parse(item));
  if (out.empty()) bad("list must be non-empty");
  return out;
}

inline std::vector<Field> fields() {
  std::vector<Field> f;
  const auto add = [&](std::string key, auto set, auto get) { f.push_back({std::move(key), set, get}); };
  add("mode", [](RunConfig& c, std::string_view v) {
        auto m = parse_mode(v);
        if (!m) bad("unknown mode '" + std::string(v) + "'");
        c.mode = *m;
      },
      [](const RunConfig& c) { return std::string(to_string(c.mode)); });

  add("victim.kind", [](RunConfig& c, std::string_view v) {
        if (v == "surface") c.victim.kind = VictimKind::Surface;
        else if (v == "linear") c.victim.kind = VictimKind::Linear;
        else bad("expected surface or linear");
      },
      [](const RunConfig& c) { return std::string(c.victim.kind == VictimKind::Surface ? "surface" : "linear"); });
  add("victim.task_seed", [](RunConfig& c, std::string_view v) { c.victim.task_seed = to_int<std::uint64_t>(v, 0); },
      [](const RunConfig& c) { return std::to_string(c.victim.task_seed); });
  add("victim.task_id", [](RunConfig& c, std::string_view v) { c.victim.task_id = std::string(v); },
      [](const RunConfig& c) { return c.victim.task_id; });
  add("victim.theta", [](RunConfig& c, std::string_view v) {
        c.victim.theta.clear();
        if (trim(v).empty()) return;
        c.victim.theta = to_list<double>(v, [](std::string_view s) { return to_real_in(s, 0.0, 1.0, "[0, 1]"); });
        if (c.victim.theta.size() != 3) bad("expected three values");
      },
      [](const RunConfig& c) { return join<double>(c.victim.theta, format_real_short); });
  add("victim.noise", [](RunConfig& c, std::string_view v) { c.victim.noise = to_real_in(v, 0.0, 10.0, "[0, 10]"); },
      [](const RunConfig& c) { return format_real_short(c.victim.noise); });
  add("victim.j_clean", [](RunConfig& c, std::string_view v) { c.victim.j_clean = to_real(v); },
      [](const RunConfig& c) { return format_real_short(c.victim.j_clean); });
  add("victim.horizon", [](RunConfig& c, std::string_view v) { c.victim.horizon = to_int<std::size_t>(v, 0); },
      [](const RunConfig& c) { return std::to_string(c.victim.horizon); });
  add("victim.obs_dim", [](RunConfig& c, std::string_view v) {
        c.victim.obs_dim = to_int<std::size_t>(v, 8);
        if (c.victim.obs_dim % 2) bad("must be even");
      },
      [](const RunConfig& c) { return std::to_string(c.victim.obs_dim); });
  add("victim.latent_dim", [](RunConfig& c, std::string_view v) { c.victim.latent_dim = to_int<std::size_t>(v, 2); },
      [](const RunConfig& c) { return std::to_string(c.victim.latent_dim); });
  add("victim.action", [](RunConfig& c, std::string_view v) {
        if (v == "discrete") c.victim.action = ActionKind::Discrete;
        else if (v == "continuous") c.victim.action = ActionKind::Continuous;
        else bad("expected discrete or continuous");
      },
      [](const RunConfig& c) { return std::string(c.victim.action == ActionKind::Discrete ? "discrete" : "continuous"); });

  add("space.families", [](RunConfig& c, std::string_view v) {
        c.families = to_list<AttackFamily>(v, [](std::string_view s) {
          auto fam = parse_family(s);
          if (!fam) bad("unknown attack family '" + std::string(s) + "'");
          return *fam;
        });
      },
      [](const RunConfig& c) { return join<AttackFamily>(c.families, [](const AttackFamily& a) { return std::string(to_string(a)); }); });
  for (auto fam : kAllFamilies) {
    const auto prefix = "space." + std::string(to_string(fam));
    add(prefix + ".eps", [fam](RunConfig& c, std::string_view v) { c.grids[fam].epsilons = to_list<int>(v, [](std::string_view s) { return to_int<int>(s, 0); }); },
        [fam](const RunConfig& c) { return join<int>(c.grids.at(fam).epsilons, [](const int& x) { return std::to_string(x); }); });
    add(prefix + ".steps", [fam](RunConfig& c, std::string_view v) { c.grids[fam].steps = to_list<int>(v, [](std::string_view s) { return to_int<int>(s, 1); }); },
        [fam](const RunConfig& c) { return join<int>(c.grids.at(fam).steps, [](const int& x) { return std::to_string(x); }); });
  }
  add("space.restarts", [](RunConfig& c, std::string_view v) { c.restarts = to_list<int>(v, [](std::string_view s) { return to_int<int>(s, 1); }); },
      [](const RunConfig& c) { return join<int>(c.restarts, [](const int& x) { return std::to_string(x); }); });
  add("space.rho", [](RunConfig& c, std::string_view v) {
        c.rhos = to_list<double>(v, [](std::string_view s) {
          const double x = to_real(s);
          if (!(x > 0.0 && x <= 1.0)) bad("must lie in (0, 1]");
          return x;
        });
      },
      [](const RunConfig& c) { return join<double>(c.rhos, format_real_short); });
  add("space.seeds", [](RunConfig& c, std::string_view v) { c.seeds = to_list<std::uint64_t>(v, [](std::string_view s) { return to_int<std::uint64_t>(s, 0); }); },
      [](const RunConfig& c) { return join<std::uint64_t>(c.seeds, [](const std::uint64_t& x) { return std::to_string(x); }); });
  add("space.allocations", [](RunConfig& c, std::string_view v) {
        c.allocations = to_list<AllocationRule>(v, [](std::string_view s) {
          auto a = parse_allocation(s);
          if (!a) bad("unknown allocation rule '" + std::string(s) + "'");
          return *a;
        });
      },
      [](const RunConfig& c) { return join<AllocationRule>(c.allocations, [](const AllocationRule& a) { return std::string(to_string(a)); }); });

  add("search.budget", [](RunConfig& c, std::string_view v) { c.search.budget = to_int<std::size_t>(v, 1); },
      [](const RunConfig& c) { return std::to_string(c.search.budget); });
  add("search.batch", [](RunConfig& c, std::string_view v) { c.search.batch = to_int<std::size_t>(v, 1); },
      [](const RunConfig& c) { return std::to_string(c.search.batch); });
  add("search.alpha_schedule", [](RunConfig& c, std::string_view v) {
        if (v == "constant") c.search.alpha_schedule = AlphaSchedule::Constant;
        else if (v == "harmonic") c.search.alpha_schedule = AlphaSchedule::Harmonic;
        else bad("expected constant or harmonic");
      },
      [](const RunConfig& c) { return std::string(c.search.alpha_schedule == AlphaSchedule::Constant ? "constant" : "harmonic"); });
  add("search.alpha", [](RunConfig& c, std::string_view v) { c.search.alpha = to_real_in(v, 0.0, 1.0, "[0, 1]"); },
      [](const RunConfig& c) { return format_real_short(c.search.alpha); });
  add("search.beta_hat", [](RunConfig& c, std::string_view v) { c.search.beta_hat = to_real_in(v, 0.0, 1e6, "[0, 1e6]"); },
      [](const RunConfig& c) { return format_real_short(c.search.beta_hat); });
  add("search.spread", [](RunConfig& c, std::string_view v) { c.search.spread = to_real_in(v, 0.0, 1e6, "[0, 1e6]"); },
      [](const RunConfig& c) { return format_real_short(c.search.spread); });
  add("search.scout_episodes", [](RunConfig& c, std::string_view v) { c.search.scout.scout_episodes = to_int<std::size_t>(v, 1); },
      [](const RunConfig& c) { return std::to_string(c.search.scout.scout_episodes); });
  add("search.confirm_episodes", [](RunConfig& c, std::string_view v) { c.search.scout.confirm_episodes = to_int<std::size_t>(v, 1); },
      [](const RunConfig& c) { return std::to_string(c.search.scout.confirm_episodes); });
  add("search.confirm_top_k", [](RunConfig& c, std::string_view v) { c.search.scout.top_k = to_int<std::size_t>(v, 1); },
      [](const RunConfig& c) { return std::to_string(c.search.scout.top_k); });
  add("search.baseline_episodes", [](RunConfig& c, std::string_view v) { c.baseline_episodes = to_int<std::size_t>(v, 1); },
      [](const RunConfig& c) { return std::to_string(c.baseline_episodes); });
  add("search.seed", [](RunConfig& c, std::string_view v) { c.search.seed = to_int<std::uint64_t>(v, 0); },
      [](const RunConfig& c) { return std::to_string(c.search.seed); });

  add("rgar.enabled", [](RunConfig& c, std::string_view v) { c.rgar.enabled = to_bool(v); },
      [](const RunConfig& c) { return bool_str(c.rgar.enabled); });
  add("rgar.memory", [](RunConfig& c, std::string_view v) { c.rgar.memory = std::string(v); },
      [](const RunConfig& c) { return c.rgar.memory; });
  add("rgar.k", [](RunConfig& c, std::string_view v) { c.rgar.retrieval.k = to_int<std::size_t>(v, 1); },
      [](const RunConfig& c) { return std::to_string(c.rgar.retrieval.k); });
  add("rgar.lambda", [](RunConfig& c, std::string_view v) { c.rgar.retrieval.lambda = to_real_in(v, 0.0, 1.0, "[0, 1]"); },
      [](const RunConfig& c) { return format_real_short(c.rgar.retrieval.lambda); });
  add("rgar.insert", [](RunConfig& c, std::string_view v) { c.rgar.insert = to_bool(v); },
      [](const RunConfig& c) { return bool_str(c.rgar.insert); });

  add("utility.w_f", [](RunConfig& c, std::string_view v) { c.weights.w_f = to_real_in(v, 0.0, 1e6, "[0, 1e6]"); },
      [](const RunConfig& c) { return format_real_short(c.weights.w_f); });
  add("utility.w_r", [](RunConfig& c, std::string_view v) { c.weights.w_r = to_real_in(v, 0.0, 1e6, "[0, 1e6]"); },
      [](const RunConfig& c) { return format_real_short(c.weights.w_r); });
  add("utility.w_v", [](RunConfig& c, std::string_view v) { c.weights.w_v = to_real_in(v, 0.0, 1e6, "[0, 1e6]"); },
      [](const RunConfig& c) { return format_real_short(c.weights.w_v); });

  add("bench.tasks", [](RunConfig& c, std::string_view v) { c.bench.tasks = to_int<std::size_t>(v, 1); },
      [](const RunConfig& c) { return std::to_string(c.bench.tasks); });
  add("bench.memory_tasks", [](RunConfig& c, std::string_view v) { c.bench.memory_tasks = to_int<std::size_t>(v, 0); },
      [](const RunConfig& c) { return std::to_string(c.bench.memory_tasks); });
  add("bench.family_seed", [](RunConfig& c, std::string_view v) { c.bench.family_seed = to_int<std::uint64_t>(v, 0); },
      [](const RunConfig& c) { return std::to_string(c.bench.family_seed); });
  add("bench.noise", [](RunConfig& c, std::string_view v) { c.bench.noise = to_real_in(v, 0.0, 10.0, "[0, 10]"); },
      [](const RunConfig& c) { return format_real_short(c.bench.noise); });

  add("theory.hitting_trials", [](RunConfig& c, std::string_view v) { c.theory.hitting_trials = to_int<std::size_t>(v, 1); },
      [](const RunConfig& c) { return std::to_string(c.theory.hitting_trials); });
  add("theory.coverage_trials", [](RunConfig& c, std::string_view v) { c.theory.coverage_trials = to_int<std::size_t>(v, 1); },
      [](const RunConfig& c) { return std::to_string(c.theory.coverage_trials); });
  add("theory.coverage_episodes", [](RunConfig& c, std::string_view v) { c.theory.coverage_episodes = to_int<std::size_t>(v, 1); },
      [](const RunConfig& c) { return std::to_string(c.theory.coverage_episodes); });
  add("theory.delta", [](RunConfig& c, std::string_view v) {
        c.theory.delta = to_real(v);
        if (!(c.theory.delta > 0.0 && c.theory.delta < 1.0)) bad("must lie in (0, 1)");
      },
      [](const RunConfig& c) { return format_real_short(c.theory.delta); });

  add("report.logs", [](RunConfig& c, std::string_view v) {
        c.report_logs.clear();
        for (auto s : split_list(v)) c.report_logs.emplace_back(s);
      },
      [](const RunConfig& c) { return join<std::string>(c.report_logs, [](const std::string& s) { return s; }); });
  add("output.dir", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); },
      [](const RunConfig& c) { return c.out_dir; });
  return f;
}

}  // namespace detail

/// Parses the sectioned key-value text format (`[section]` headers, `key = value`
/// lines, `#` comments). Unknown keys, bad values and range violations raise
/// ParseError naming the key and line.
inline RunConfig parse_run_config_text(std::string_view text) {
  const auto table = detail::fields();
  std::map<std::string, const detail::Field*> by_key;
  for (const auto& f : table) by_key[f.key] = &f;
  RunConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::string section;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(lineno, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected 'key = value'");
    const auto name = std::string(trim(line.substr(0, eq)));
    const auto key = section.empty() ? name : section + "." + name;
    const auto it = by_key.find(key);
    if (it == by_key.end()) throw ParseError(lineno, "unknown key '" + key + "'");
    if (seen.contains(key)) throw ParseError(lineno, "duplicate key '" + key + "'");
    seen[key] = lineno;
    try {
      it->second->set(cfg, trim(line.substr(eq + 1)));
    } catch (const std::string& why) {
      throw ParseError(lineno, "key '" + key + "': " + why);
    }
  }
  const auto line_of = [&](const std::string& key) { return seen.contains(key) ? seen[key] : 0; };
  if (cfg.search.budget < cfg.search.batch)
    throw ParseError(line_of("search.budget"), "key 'search.budget': must be >= search.batch");
  try {
    (void)cfg.space();
  } catch (const ConfigError& e) {
    throw ParseError(line_of("space." + e.field()), "key 'space." + e.field() + "': " + e.what());
  }
  return cfg;
}

inline RunConfig parse_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read run configuration " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_run_config_text(ss.str());
}

/// Writes every key with its current value; parse_run_config_text inverts it.
inline std::string emit_run_config(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& f : detail::fields()) {
    const auto dot = f.key.find('.');
    const auto sec = dot == std::string::npos ? std::string{} : f.key.substr(0, dot);
    const auto name = dot == std::string::npos ? f.key : f.key.substr(dot + 1);
    if (sec != section) {
      out += "\n[" + sec + "]\n";
      section = sec;
    }
    out += name + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace attacksearch
