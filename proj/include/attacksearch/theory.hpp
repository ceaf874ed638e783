#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "attacksearch/evaluation.hpp"
#include "attacksearch/proposal.hpp"
#include "attacksearch/response_surface.hpp"

namespace attacksearch {

/// Exact utility of every configuration, in canonical order.
struct UtilityMap {
  std::vector<AttackConfig> configs;
  std::vector<double> utilities;
  std::vector<UtilityReport> reports;  // filled by brute_force_utility only
  double u_star = -std::numeric_limits<double>::infinity();
  std::size_t argmax = 0;  // first maximizer in canonical order

  static UtilityMap from(std::vector<AttackConfig> configs, std::vector<double> utilities) {
    if (configs.empty() || configs.size() != utilities.size()) throw ArgumentError("utility map: bad sizes");
    UtilityMap m;
    m.configs = std::move(configs);
    m.utilities = std::move(utilities);
    for (std::size_t i = 0; i < m.utilities.size(); ++i) {
      if (m.utilities[i] > m.u_star) {
        m.u_star = m.utilities[i];
        m.argmax = i;
      }
    }
    return m;
  }

  [[nodiscard]] std::size_t size() const noexcept { return utilities.size(); }
};

/// Evaluates every configuration once through the ordinary evaluation path.
/// Stochastic victims are refused unless `averaging_episodes` is supplied.
inline UtilityMap brute_force_utility(const Victim& victim, const ConfigSpace& space, const CleanBaseline& baseline,
                                      const UtilityWeights& weights = {},
                                      std::optional<std::size_t> averaging_episodes = std::nullopt, Rng rng = Rng(0)) {
  if (!victim.deterministic() && !averaging_episodes)
    throw PreconditionError("brute_force_utility: victim is stochastic; supply episodes for averaging");
  const std::size_t m = averaging_episodes.value_or(1);
  auto configs = enumerate(space);
  std::vector<UtilityReport> reports(configs.size());
  parallel_for(configs.size(), [&](std::size_t i) {
    reports[i] = estimate_utility(victim, configs[i], m, baseline, weights, evaluation_stream(rng, configs[i], Phase::Confirm));
  });
  std::vector<double> u(configs.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = reports[i].u;
  auto map = UtilityMap::from(std::move(configs), std::move(u));
  map.reports = std::move(reports);
  return map;
}

/// Population utility of a response-surface victim straight from its
/// ground-truth functions, by nested loops over the grids. Shares no code with
/// enumeration, rollouts or estimation. V is sigma(c) / (|J_clean| + 1).
inline UtilityMap analytic_utility_map(const ResponseSurfaceVictim& victim, const ConfigSpace& space,
                                       const UtilityWeights& w = {}) {
  std::vector<AttackConfig> configs;
  std::vector<double> u;
  const double j = victim.j_clean();
  const double denom = std::abs(j) + 1.0;
  for (const auto& g : space.grids())
    for (int e : g.epsilons)
      for (int s : g.steps)
        for (int r : g.restarts)
          for (double rho : g.rhos)
            for (auto seed : g.seeds)
              for (auto a : g.allocations) {
                const AttackConfig c{g.family, e, s, r, rho, seed, a};
                const double d = j * victim.expected_drop(c) / denom;
                const double f = victim.flip_probability(c);
                const double t = victim.episode_seconds(c);
                const double v = victim.return_sigma(c) / denom;
                configs.push_back(c);
                u.push_back(d + w.w_f * f - w.w_r * std::log(1.0 + t) - w.w_v * v);
              }
  return UtilityMap::from(std::move(configs), std::move(u));
}

/// Membership mask of G_eta = {c : U(c) >= U* - eta}.
struct EffectiveSet {
  double eta = 0.0;
  std::vector<bool> members;

  [[nodiscard]] std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(members.begin(), members.end(), true));
  }
};

inline EffectiveSet effective_set(const UtilityMap& umap, double eta) {
  if (!(eta >= 0.0)) throw ArgumentError("effective_set: eta must be >= 0");
  EffectiveSet g;
  g.eta = eta;
  g.members.resize(umap.size());
  for (std::size_t i = 0; i < umap.size(); ++i) g.members[i] = umap.utilities[i] >= umap.u_star - eta;
  return g;
}

/// Gibbs reference q*(c) proportional to exp(beta U(c)), max-shifted.
inline ProposalDistribution gibbs_reference(const UtilityMap& umap, double beta) {
  if (!(beta >= 0.0)) throw ArgumentError("gibbs_reference: beta must be >= 0");
  std::vector<double> w(umap.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(beta * (umap.utilities[i] - umap.u_star));
  return ProposalDistribution::from_weights(std::move(w));
}

/// h = 1 - (1 - p)^b
inline double hit_probability(double p, std::size_t b) {
  if (!(p >= 0.0 && p <= 1.0) || b < 1) throw ArgumentError("hit_probability: need p in [0,1], b >= 1");
  return 1.0 - std::pow(1.0 - p, static_cast<double>(b));
}

/// Upper bound 1 / h on the expected hitting round; +inf when p = 0.
inline double hitting_time_bound(double p, std::size_t b) {
  const double h = hit_probability(p, b);
  return h > 0.0 ? 1.0 / h : std::numeric_limits<double>::infinity();
}

struct BoundReport {
  double p = 0.0;
  std::size_t b = 0;
  double h = 0.0;
  double bound = 0.0;
  double empirical = 0.0;
  double se = 0.0;
  std::size_t trials = 0;
  std::size_t capped = 0;  // trials that hit the round cap
  bool pass = false;
};

/// Simulates rounds of b independent draws from q_t (the last distribution is
/// reused once the sequence runs out) until a draw lands in G. Verdict:
/// empirical mean <= bound(p_0) + 3 SE.
inline BoundReport monte_carlo_hitting_time(std::span<const ProposalDistribution> q_sequence, const std::vector<bool>& members,
                                            std::size_t b, std::size_t trials, Rng rng,
                                            std::size_t max_rounds = 100000) {
  if (q_sequence.empty() || trials < 1 || b < 1) throw ArgumentError("monte_carlo_hitting_time: bad arguments");
  BoundReport rep;
  rep.p = q_sequence.front().mass(members);
  rep.b = b;
  rep.h = hit_probability(std::clamp(rep.p, 0.0, 1.0), b);
  rep.bound = hitting_time_bound(std::clamp(rep.p, 0.0, 1.0), b);
  rep.trials = trials;
  std::vector<double> rounds(trials);
  std::vector<std::uint8_t> capped(trials, 0);
  parallel_for(trials, [&](std::size_t i) {
    auto r = rng.split(i);
    std::size_t t = 0;
    bool hit = false;
    while (!hit && t < max_rounds) {
      const auto& q = q_sequence[std::min(t, q_sequence.size() - 1)];
      ++t;
      for (std::size_t k = 0; k < b; ++k) hit = members[q.sample(r)] || hit;
    }
    rounds[i] = static_cast<double>(t);
    capped[i] = hit ? 0 : 1;
  });
  double sum = 0.0, ss = 0.0;
  for (double x : rounds) sum += x;
  rep.empirical = sum / static_cast<double>(trials);
  for (double x : rounds) ss += (x - rep.empirical) * (x - rep.empirical);
  rep.se = trials > 1 ? std::sqrt(ss / static_cast<double>(trials - 1) / static_cast<double>(trials)) : 0.0;
  rep.capped = static_cast<std::size_t>(std::count(capped.begin(), capped.end(), 1));
  rep.pass = rep.capped == 0 && rep.empirical <= rep.bound + 3.0 * rep.se;
  return rep;
}

inline BoundReport monte_carlo_hitting_time(const ProposalDistribution& q, const std::vector<bool>& members, std::size_t b,
                                            std::size_t trials, Rng rng) {
  return monte_carlo_hitting_time(std::span(&q, 1), members, b, trials, rng);
}

struct NoisyCorrectionVerdict {
  bool guaranteed = false;
  double threshold = 0.0;  // gamma/(1+gamma) (r - p)
  double slack = 0.0;      // threshold - xi
};

/// Improvement q_{t+1}(G) > p_t is guaranteed iff xi < gamma/(1+gamma) (r - p_t).
inline NoisyCorrectionVerdict noisy_correction_check(double p, double r, double gamma, double xi) {
  if (!(gamma >= 0.0) || !(xi >= 0.0)) throw ArgumentError("noisy_correction_check: gamma and xi must be >= 0");
  NoisyCorrectionVerdict v;
  v.threshold = gamma / (1.0 + gamma) * (r - p);
  v.slack = v.threshold - xi;
  // Strict inequality; a slack within rounding of zero counts as equality.
  v.guaranteed = v.slack > 1e-12 * std::max(1.0, std::abs(v.threshold));
  return v;
}

/// C_{g1}(q)(G) - C_{g2}(q)(G) = (g1 - g2)(r - p) / ((1 + g1)(1 + g2))
inline double baseline_gap(double p, double r, double gamma_ours, double gamma_base) {
  if (!(gamma_ours >= 0.0) || !(gamma_base >= 0.0)) throw ArgumentError("baseline_gap: gammas must be >= 0");
  return (gamma_ours - gamma_base) * (r - p) / ((1.0 + gamma_ours) * (1.0 + gamma_base));
}

/// Uniform deviation radius zeta_m(delta) for m-episode utility estimates over
/// |C| configurations.
inline double hoeffding_bound(std::size_t m, double delta, std::size_t space_size, double r_min, double r_max,
                              double j_clean, double w_f) {
  if (m < 1) throw ArgumentError("hoeffding_bound: m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("hoeffding_bound: delta must lie in (0, 1)");
  if (!(r_max >= r_min)) throw ArgumentError("hoeffding_bound: need R_max >= R_min");
  if (space_size < 1) throw ArgumentError("hoeffding_bound: empty space");
  const double root = std::sqrt(std::log(4.0 * static_cast<double>(space_size) / delta) / (2.0 * static_cast<double>(m)));
  return (r_max - r_min) / (std::abs(j_clean) + 1.0) * root + w_f * root;
}

struct CoverageReport {
  double zeta = 0.0;
  double eta = 0.0;
  std::size_t trials = 0;
  std::size_t covered = 0;             // trials with max |U_hat - U| <= zeta
  std::size_t implication_failures = 0;  // covered trials where an empirically eta-optimal config was not (eta+2zeta)-optimal
  double frequency = 0.0;
  double se = 0.0;
  double max_deviation = 0.0;
  bool pass = false;
};

/// Repeated finite-episode estimation of every configuration against the
/// analytic population utility. Passes when the coverage frequency is at least
/// 1 - delta - 3 SE and the near-optimality implication holds in every covered trial.
inline CoverageReport coverage_experiment(const ResponseSurfaceVictim& victim, const ConfigSpace& space, std::size_t m,
                                          double delta, double eta, std::size_t trials, const UtilityWeights& weights,
                                          Rng rng) {
  const auto bounds = victim.return_bounds();
  if (!bounds) throw PreconditionError("coverage_experiment: victim returns are unbounded");
  if (trials < 1) throw ArgumentError("coverage_experiment: trials must be >= 1");
  const auto population = analytic_utility_map(victim, space, weights);
  CoverageReport rep;
  rep.eta = eta;
  rep.trials = trials;
  rep.zeta = hoeffding_bound(m, delta, space.size(), bounds->first, bounds->second, victim.j_clean(), weights.w_f);
  CleanBaseline baseline;
  baseline.j_clean = victim.j_clean();
  baseline.episodes = 1;
  const auto configs = enumerate(space);
  std::vector<std::uint8_t> covered(trials, 0), implication_ok(trials, 1);
  std::vector<double> max_dev(trials, 0.0);
  parallel_for(trials, [&](std::size_t trial) {
    const auto trial_rng = rng.split(trial);
    std::vector<double> est(configs.size());
    double dev = 0.0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      est[i] = estimate_utility(victim, configs[i], m, baseline, weights, trial_rng.split(i)).u;
      dev = std::max(dev, std::abs(est[i] - population.utilities[i]));
    }
    max_dev[trial] = dev;
    covered[trial] = dev <= rep.zeta;
    const double est_max = *std::max_element(est.begin(), est.end());
    for (std::size_t i = 0; i < configs.size(); ++i)
      if (est[i] >= est_max - eta && population.utilities[i] < population.u_star - eta - 2.0 * rep.zeta) implication_ok[trial] = 0;
  });
  for (std::size_t t = 0; t < trials; ++t) {
    rep.covered += covered[t];
    if (covered[t] && !implication_ok[t]) ++rep.implication_failures;
    rep.max_deviation = std::max(rep.max_deviation, max_dev[t]);
  }
  rep.frequency = static_cast<double>(rep.covered) / static_cast<double>(trials);
  const double target = 1.0 - delta;
  rep.se = std::sqrt(target * (1.0 - target) / static_cast<double>(trials));
  rep.pass = rep.frequency >= target - 3.0 * rep.se && rep.implication_failures == 0;
  return rep;
}

}  // namespace attacksearch
