#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "attacksearch/format.hpp"
#include "attacksearch/parallel.hpp"
#include "attacksearch/victim.hpp"

namespace attacksearch {

struct UtilityWeights {
  double w_f = 0.25;
  double w_r = 0.15;
  double w_v = 0.05;

  void validate() const {
    if (!(w_f >= 0.0 && w_r >= 0.0 && w_v >= 0.0)) throw ArgumentError("utility weights must be >= 0");
  }
  bool operator==(const UtilityWeights&) const = default;
};

/// Clean-observation reference for one task.
struct CleanBaseline {
  double j_clean = 0.0;
  std::size_t episodes = 0;
  double seconds = 0.0;  // logged separately, never part of T
  RolloutBatch rollouts;
};

inline CleanBaseline measure_baseline(const Victim& victim, std::size_t episodes, Rng rng) {
  if (episodes == 0) throw ArgumentError("measure_baseline: episodes must be >= 1");
  CleanBaseline b;
  b.rollouts = victim.clean_rollout(episodes, rng.split("clean"));
  b.episodes = episodes;
  b.j_clean = std::accumulate(b.rollouts.returns.begin(), b.rollouts.returns.end(), 0.0) / static_cast<double>(episodes);
  b.seconds = b.rollouts.virtual_seconds;
  return b;
}

/// (J_clean - J_adv) / (|J_clean| + 1)
inline double reward_drop(double j_clean, double j_adv) {
  if (!std::isfinite(j_clean) || !std::isfinite(j_adv)) throw ArgumentError("reward_drop: non-finite input");
  return (j_clean - j_adv) / (std::abs(j_clean) + 1.0);
}

/// Fraction of decision points whose action changed: argmax mismatch for
/// discrete actions, L1 shift above kappa for continuous ones.
inline double flip_rate(std::span<const std::vector<double>> clean, std::span<const std::vector<double>> attacked,
                        ActionKind kind, double kappa) {
  if (clean.empty() || clean.size() != attacked.size())
    throw ArgumentError("flip_rate: action sequences must be non-empty and of equal length");
  std::size_t flips = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const auto& a = clean[i];
    const auto& b = attacked[i];
    if (a.size() != b.size()) throw ArgumentError("flip_rate: action dimension mismatch");
    if (kind == ActionKind::Discrete) {
      flips += std::max_element(a.begin(), a.end()) - a.begin() != std::max_element(b.begin(), b.end()) - b.begin();
    } else {
      double l1 = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) l1 += std::abs(a[k] - b[k]);
      flips += l1 > kappa;
    }
  }
  return static_cast<double>(flips) / static_cast<double>(clean.size());
}

/// Population standard deviation of attacked returns over |J_clean| + 1.
inline double variability(std::span<const double> returns, double j_clean) {
  if (returns.empty()) throw ArgumentError("variability: no returns");
  const double n = static_cast<double>(returns.size());
  const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  return std::sqrt(ss / n) / (std::abs(j_clean) + 1.0);
}

/// U = D + w_f F - w_r ln(1 + T) - w_v V
inline double scalarize(double d, double f, double t, double v, const UtilityWeights& w = {}) {
  if (t < 0.0) throw ArgumentError("scalarize: negative time");
  if (!std::isfinite(d) || !std::isfinite(f) || !std::isfinite(t) || !std::isfinite(v))
    throw ArgumentError("scalarize: non-finite component");
  return d + w.w_f * f - w.w_r * std::log1p(t) - w.w_v * v;
}

enum class Phase { Scout, Confirm };

constexpr std::string_view to_string(Phase p) noexcept { return p == Phase::Scout ? "scout" : "confirm"; }

struct UtilityReport {
  AttackConfig config;
  double d = 0.0;
  double f = 0.0;
  double t = 0.0;  // virtual seconds per attacked episode
  double v = 0.0;
  double u = 0.0;
  std::size_t episodes = 0;
  std::vector<double> returns;
  Phase phase = Phase::Scout;
  std::uint64_t seed = 0;  // key of the random stream used
  double wall_seconds = 0.0;
};

/// Empirical utility of `config` from `episodes` attacked rollouts.
inline UtilityReport estimate_utility(const Victim& victim, const AttackConfig& config, std::size_t episodes,
                                      const CleanBaseline& baseline, const UtilityWeights& weights, Rng rng) {
  if (episodes == 0) throw ArgumentError("estimate_utility: episodes must be >= 1");
  RolloutBatch batch;
  try {
    batch = victim.attacked_rollout(config, episodes, rng);
  } catch (const std::exception& e) {
    throw std::runtime_error("victim failed on " + to_string(config) + ": " + e.what());
  }
  UtilityReport r;
  r.config = config;
  r.episodes = episodes;
  r.seed = rng.key();
  const double j_adv = std::accumulate(batch.returns.begin(), batch.returns.end(), 0.0) / static_cast<double>(episodes);
  r.d = reward_drop(baseline.j_clean, j_adv);
  if (batch.flip_expectation) {
    r.f = *batch.flip_expectation;
  } else if (!batch.flips.empty()) {
    r.f = static_cast<double>(std::count(batch.flips.begin(), batch.flips.end(), true)) / static_cast<double>(batch.flips.size());
  }
  r.t = batch.virtual_seconds / static_cast<double>(episodes);
  r.v = variability(batch.returns, baseline.j_clean);
  r.u = scalarize(r.d, r.f, r.t, r.v, weights);
  r.returns = std::move(batch.returns);
  r.wall_seconds = batch.wall_seconds;
  return r;
}

struct ScoutConfirmSettings {
  std::size_t scout_episodes = 2;
  std::size_t confirm_episodes = 5;
  std::size_t top_k = 2;
  bool operator==(const ScoutConfirmSettings&) const = default;
};

struct ScoutConfirmResult {
  std::vector<UtilityReport> scouts;    // candidate order
  std::vector<UtilityReport> confirms;  // descending scout utility
  std::size_t episodes_used = 0;
};

/// Stream for evaluating `config` in a phase: independent of evaluation order.
inline Rng evaluation_stream(const Rng& rng, const AttackConfig& config, Phase phase) {
  return rng.split(to_string(config)).split(to_string(phase));
}

/// Scouts every candidate cheaply, then re-evaluates the top_k by scout
/// utility (ties in canonical order) with more episodes.
inline ScoutConfirmResult scout_confirm(const Victim& victim, std::span<const AttackConfig> candidates,
                                        const ScoutConfirmSettings& s, const CleanBaseline& baseline,
                                        const UtilityWeights& weights, const Rng& rng) {
  if (candidates.empty()) throw ArgumentError("scout_confirm: no candidates");
  if (s.scout_episodes == 0 || s.confirm_episodes == 0) throw ArgumentError("scout_confirm: episode counts must be >= 1");
  if (s.top_k == 0 || s.top_k > candidates.size()) throw ArgumentError("scout_confirm: top_k must lie in [1, |candidates|]");
  ScoutConfirmResult out;
  out.scouts.resize(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t i) {
    out.scouts[i] = estimate_utility(victim, candidates[i], s.scout_episodes, baseline, weights,
                                     evaluation_stream(rng, candidates[i], Phase::Scout));
    out.scouts[i].phase = Phase::Scout;
  });
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (out.scouts[a].u != out.scouts[b].u) return out.scouts[a].u > out.scouts[b].u;
    return candidates[a] < candidates[b];
  });
  out.confirms.resize(s.top_k);
  parallel_for(s.top_k, [&](std::size_t j) {
    const auto& c = candidates[order[j]];
    out.confirms[j] = estimate_utility(victim, c, s.confirm_episodes, baseline, weights,
                                       evaluation_stream(rng, c, Phase::Confirm));
    out.confirms[j].phase = Phase::Confirm;
  });
  out.episodes_used = candidates.size() * s.scout_episodes + s.top_k * s.confirm_episodes;
  return out;
}

/// One line of the trial log. Reals are written with 17 significant digits.
struct TrialRecord {
  std::string task;
  std::string method;
  std::size_t round = 0;
  std::size_t trial = 0;  // 1-based index of the distinct configuration within the run
  UtilityReport report;
};

inline void write_trial(std::ostream& os, const TrialRecord& rec) {
  const auto& r = rec.report;
  os << "{\"task\":\"" << json_escape(rec.task) << "\",\"method\":\"" << json_escape(rec.method)
     << "\",\"round\":" << rec.round << ",\"trial\":" << rec.trial << ",\"phase\":\"" << to_string(r.phase)
     << "\",\"config\":\"" << to_string(r.config) << "\",\"D\":" << format_real(r.d) << ",\"F\":" << format_real(r.f)
     << ",\"T\":" << format_real(r.t) << ",\"V\":" << format_real(r.v) << ",\"U\":" << format_real(r.u)
     << ",\"episodes\":" << r.episodes << ",\"seed\":" << r.seed << "}\n";
}

}  // namespace attacksearch
