#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "attacksearch/config_space.hpp"
#include "attacksearch/evaluation.hpp"
#include "attacksearch/proposal.hpp"

namespace attacksearch {

enum FailureTag : unsigned {
  kWeakDrop = 1U << 0,
  kHighCost = 1U << 1,
  kUnstableReturns = 1U << 2,
  kLowFlip = 1U << 3,
};

/// Failure patterns plus grid-step direction recommendations for one trial.
struct FeedbackSignal {
  unsigned tags = 0;
  int epsilon_dir = 0;  // -1, 0, +1 grid steps
  int steps_dir = 0;
  bool toggle_allocation = false;

  [[nodiscard]] bool has(FailureTag t) const noexcept { return (tags & t) != 0; }
  [[nodiscard]] bool neutral() const noexcept { return epsilon_dir == 0 && steps_dir == 0 && !toggle_allocation; }
  bool operator==(const FeedbackSignal&) const = default;
};

inline std::string tags_string(const FeedbackSignal& s) {
  std::string out;
  const auto add = [&](FailureTag t, const char* name) {
    if (!s.has(t)) return;
    if (!out.empty()) out += '|';
    out += name;
  };
  add(kWeakDrop, "weak-drop");
  add(kHighCost, "high-cost");
  add(kUnstableReturns, "unstable-returns");
  add(kLowFlip, "low-flip");
  return out;
}

/// Deterministic rule set turning an evaluated trial into feedback.
inline FeedbackSignal feedback(const UtilityReport& r, const UtilityWeights& w = {}) {
  FeedbackSignal s;
  if (r.d < 0.1) {
    s.tags |= kWeakDrop;
    s.epsilon_dir = +1;
  }
  if (w.w_r * std::log1p(r.t) > r.d + w.w_f * r.f) {
    s.tags |= kHighCost;
    s.steps_dir = -1;
  }
  if (r.v > 0.5 * std::max(r.d, 0.1)) s.tags |= kUnstableReturns;
  if (r.f < 0.2) {
    s.tags |= kLowFlip;
    s.toggle_allocation = true;
  }
  return s;
}

enum class AlphaSchedule { Constant, Harmonic };

struct SearchParams {
  std::size_t budget = 16;  // distinct configurations to evaluate
  std::size_t batch = 4;
  AlphaSchedule alpha_schedule = AlphaSchedule::Constant;
  double alpha = 0.5;
  double beta_hat = 8.0;
  double spread = 0.5;
  /// When false the proposal is never updated (pure sampling from q0).
  bool refine = true;
  bool record_proposals = false;
  ScoutConfirmSettings scout;
  std::uint64_t seed = 0;

  [[nodiscard]] double alpha_at(std::size_t round) const noexcept {
    return alpha_schedule == AlphaSchedule::Constant ? alpha : 1.0 / (1.0 + static_cast<double>(round));
  }

  void validate() const {
    if (batch < 1 || budget < batch) throw ArgumentError("search params: require budget >= batch >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("search params: alpha must lie in [0, 1]");
    if (!(beta_hat >= 0.0)) throw ArgumentError("search params: beta_hat must be >= 0");
    if (!(spread >= 0.0)) throw ArgumentError("search params: spread must be >= 0");
    if (scout.scout_episodes < 1 || scout.confirm_episodes < 1 || scout.top_k < 1)
      throw ArgumentError("search params: scout/confirm settings must be >= 1");
  }
  bool operator==(const SearchParams&) const = default;
};

/// One evaluated configuration with its effective (confirm if present) report.
struct HistoryEntry {
  std::size_t index = 0;  // canonical position in the space
  std::size_t round = 0;
  std::size_t trial = 0;  // 1-based evaluation order
  UtilityReport scout;
  std::optional<UtilityReport> confirm;
  FeedbackSignal signal;

  [[nodiscard]] const UtilityReport& effective() const noexcept { return confirm ? *confirm : scout; }
};

struct SearchHistory {
  std::vector<HistoryEntry> entries;
  std::vector<double> best_per_round;  // best-so-far effective utility after each round
  std::vector<std::size_t> best_index_per_round;
  std::size_t rounds = 0;
  std::size_t episodes = 0;
  double virtual_seconds = 0.0;
  std::vector<std::string> warnings;
};

/// Samples up to b distinct unevaluated configurations, successively and in
/// proportion to q restricted to the unevaluated set (uniform over it when
/// that mass is zero). Returned in canonical order.
inline std::vector<std::size_t> propose_batch(const ProposalDistribution& q, std::size_t b, const std::vector<bool>& evaluated,
                                              Rng rng) {
  if (b < 1) throw ArgumentError("propose_batch: b must be >= 1");
  if (evaluated.size() != q.size()) throw ArgumentError("propose_batch: evaluated mask misaligned");
  std::vector<std::size_t> open;
  std::vector<double> w;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (evaluated[i]) continue;
    open.push_back(i);
    w.push_back(q[i]);
  }
  std::vector<std::size_t> out;
  if (open.size() <= b) return open;
  double total = 0.0;
  for (double x : w) total += x;
  while (out.size() < b) {
    std::size_t pick = 0;
    if (total <= 1e-300) {
      std::vector<std::size_t> left;
      for (std::size_t j = 0; j < open.size(); ++j)
        if (w[j] >= 0.0) left.push_back(j);
      pick = left[rng.below(left.size())];
    } else {
      double u = rng.uniform() * total;
      std::size_t last = open.size();
      for (std::size_t j = 0; j < open.size(); ++j) {
        if (w[j] <= 0.0) continue;
        last = j;
        if (u < w[j]) break;
        u -= w[j];
      }
      pick = last;
    }
    out.push_back(open[pick]);
    if (w[pick] > 0.0) total -= w[pick];
    w[pick] = -1.0;  // removed
    if (total < 0.0) total = 0.0;
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Applies a feedback direction to `c`, clamping to the grid.
inline AttackConfig shift_by_feedback(const AttackConfig& c, const FeedbackSignal& s, const ConfigSpace& space) {
  const auto* g = space.grid(c.family);
  if (g == nullptr) return c;
  auto moved = c;
  const auto move = [](const std::vector<int>& grid, int value, int dir) {
    const auto pos = static_cast<long>(std::find(grid.begin(), grid.end(), value) - grid.begin());
    return grid[static_cast<std::size_t>(std::clamp(pos + dir, 0L, static_cast<long>(grid.size()) - 1))];
  };
  if (s.epsilon_dir != 0) moved.epsilon = move(g->epsilons, c.epsilon, s.epsilon_dir);
  if (s.steps_dir != 0) moved.steps = move(g->steps, c.steps, s.steps_dir);
  if (s.toggle_allocation && g->allocations.size() > 1) {
    const auto pos = static_cast<std::size_t>(std::find(g->allocations.begin(), g->allocations.end(), c.allocation) - g->allocations.begin());
    moved.allocation = g->allocations[(pos + 1) % g->allocations.size()];
  }
  return moved;
}

/// Feedback-induced proposal: exp(beta * U) on evaluated configurations, each
/// also spreading spread * weight over its neighborhood, shifted one grid step
/// along any nonzero feedback direction.
inline ProposalDistribution induced_proposal(std::span<const HistoryEntry> history, const ConfigSpace& space,
                                             double beta_hat, double spread) {
  if (history.empty()) throw ArgumentError("induced_proposal: empty history");
  if (!(beta_hat >= 0.0) || !(spread >= 0.0)) throw ArgumentError("induced_proposal: beta_hat and spread must be >= 0");
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& e : history) top = std::max(top, e.effective().u);
  std::vector<double> w(space.size(), 0.0);
  for (const auto& e : history) {
    const double weight = std::exp(beta_hat * (e.effective().u - top));
    w[e.index] += weight;
    if (spread == 0.0) continue;
    const auto config = space.at(e.index);
    const auto nbrs = neighborhood(config, space);
    if (nbrs.empty()) continue;
    const double share = spread * weight / static_cast<double>(nbrs.size());
    for (const auto& n : nbrs) {
      const auto target = e.signal.neutral() ? n : shift_by_feedback(n, e.signal, space);
      w[*space.index_of(target)] += share;
    }
  }
  return ProposalDistribution::from_weights(std::move(w));
}

struct SearchResult {
  AttackConfig best_config;
  UtilityReport best_report;
  SearchHistory history;
  std::vector<ProposalDistribution> proposals;  // q_0 .. q_R when recorded
};

/// Finite-budget loop: propose -> scout/confirm -> feedback -> induced
/// proposal -> mixture update, until min(B, |space|) distinct configurations
/// have been evaluated.
inline SearchResult run_search(const Victim& victim, const ConfigSpace& space, const SearchParams& params,
                               const ProposalDistribution& q0, const CleanBaseline& baseline,
                               const UtilityWeights& weights = {}) {
  params.validate();
  if (q0.size() != space.size()) throw ArgumentError("run_search: q0 misaligned with space");
  SearchResult res;
  auto& hist = res.history;
  std::size_t budget = params.budget;
  if (budget > space.size()) {
    hist.warnings.push_back("budget " + std::to_string(budget) + " clamped to |space| = " + std::to_string(space.size()));
    budget = space.size();
  }
  const Rng root(params.seed);
  const Rng eval_rng = root.split("evaluate");
  std::vector<bool> evaluated(space.size(), false);
  ProposalDistribution q = q0;
  if (params.record_proposals) res.proposals.push_back(q);
  double best_u = -std::numeric_limits<double>::infinity();
  std::size_t best_entry = 0;

  while (hist.entries.size() < budget) {
    const std::size_t round = hist.rounds;
    const std::size_t want = std::min(params.batch, budget - hist.entries.size());
    const auto batch = propose_batch(q, want, evaluated, root.split("propose").split(round));
    if (batch.empty()) break;
    std::vector<AttackConfig> candidates;
    candidates.reserve(batch.size());
    for (auto i : batch) candidates.push_back(space.at(i));
    auto settings = params.scout;
    settings.top_k = std::min(settings.top_k, candidates.size());
    auto sc = scout_confirm(victim, candidates, settings, baseline, weights, eval_rng);
    hist.episodes += sc.episodes_used;

    const std::size_t first_new = hist.entries.size();
    for (std::size_t j = 0; j < batch.size(); ++j) {
      HistoryEntry e;
      e.index = batch[j];
      e.round = round;
      e.trial = hist.entries.size() + 1;
      e.scout = std::move(sc.scouts[j]);
      hist.virtual_seconds += e.scout.t * static_cast<double>(e.scout.episodes);
      evaluated[e.index] = true;
      hist.entries.push_back(std::move(e));
    }
    for (auto& c : sc.confirms) {
      for (std::size_t j = first_new; j < hist.entries.size(); ++j) {
        if (hist.entries[j].scout.config == c.config) {
          hist.virtual_seconds += c.t * static_cast<double>(c.episodes);
          hist.entries[j].confirm = std::move(c);
          break;
        }
      }
    }
    for (std::size_t j = first_new; j < hist.entries.size(); ++j) {
      auto& e = hist.entries[j];
      e.signal = feedback(e.effective(), weights);
      const double u = e.effective().u;
      if (u > best_u || (u == best_u && e.effective().config < hist.entries[best_entry].effective().config)) {
        best_u = u;
        best_entry = j;
      }
    }
    hist.best_per_round.push_back(best_u);
    hist.best_index_per_round.push_back(hist.entries[best_entry].index);
    ++hist.rounds;

    if (params.refine) {
      const auto q_hat = induced_proposal(hist.entries, space, params.beta_hat, params.spread);
      q = update(q, q_hat, params.alpha_at(round));
    }
    if (params.record_proposals) res.proposals.push_back(q);
  }
  res.best_report = hist.entries[best_entry].effective();
  res.best_config = res.best_report.config;
  return res;
}

/// Trial-log lines for a finished search (scout then confirm per trial).
inline void write_history(std::ostream& os, const SearchHistory& hist, const std::string& task, const std::string& method) {
  for (const auto& e : hist.entries) {
    write_trial(os, {task, method, e.round + 1, e.trial, e.scout});
    if (e.confirm) write_trial(os, {task, method, e.round + 1, e.trial, *e.confirm});
  }
}

}  // namespace attacksearch
