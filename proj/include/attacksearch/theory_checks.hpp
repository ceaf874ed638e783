#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "attacksearch/config_space.hpp"
#include "attacksearch/search.hpp"
#include "attacksearch/theory.hpp"

namespace attacksearch {

struct TheoryCheck {
  std::string name;
  double computed = 0.0;
  double bound = 0.0;
  double empirical = 0.0;
  double se = 0.0;
  bool pass = false;
};

struct TheoryCheckSettings {
  std::size_t hitting_trials = 20000;
  std::size_t coverage_trials = 500;
  std::size_t coverage_episodes = 50;
  double delta = 0.1;
  std::uint64_t seed = 0;
};

/// 96-configuration space used for coverage checks: two gradient families,
/// six budgets, four step counts, both allocation rules.
inline ConfigSpace coverage_space() {
  std::vector<FamilyGrid> grids;
  for (auto f : {AttackFamily::ApgdCe, AttackFamily::ApgdDlr}) {
    FamilyGrid g;
    g.family = f;
    g.epsilons = {2, 4, 8, 12, 16, 20};
    g.steps = {4, 10, 16, 24};
    grids.push_back(g);
  }
  return ConfigSpace(std::move(grids));
}

namespace detail {

inline std::pair<ProposalDistribution, ProposalDistribution> random_pair(std::size_t n, Rng& rng) {
  std::vector<double> a(n), b(n);
  for (auto& x : a) x = rng.uniform() + 1e-3;
  for (auto& x : b) x = rng.uniform() + 1e-3;
  return {ProposalDistribution::from_weights(a), ProposalDistribution::from_weights(b)};
}

inline std::vector<bool> random_subset(std::size_t n, Rng& rng) {
  std::vector<bool> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = rng.bernoulli(0.4);
  g[rng.below(n)] = true;
  return g;
}

}  // namespace detail

/// Every identity and bound of the proposal-mass analysis, evaluated on
/// random instances and Monte-Carlo simulations.
inline std::vector<TheoryCheck> run_theory_checks(const TheoryCheckSettings& s) {
  std::vector<TheoryCheck> out;
  const Rng root(s.seed);

  {  // Mass identity and operator identity of the correction operator.
    auto rng = root.split("mass");
    double worst_mass = 0.0, worst_op = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const std::size_t n = 2 + rng.below(40);
      auto [q, q_star] = detail::random_pair(n, rng);
      const auto g = detail::random_subset(n, rng);
      const double gamma = rng.uniform(0.0, 10.0);
      const auto c = correction_operator(q, q_star, gamma);
      const double lhs = c.mass(g) - q.mass(g);
      const double rhs = gamma / (1.0 + gamma) * (q_star.mass(g) - q.mass(g));
      worst_mass = std::max(worst_mass, std::abs(lhs - rhs));
      const auto u = update(q, q_star, gamma / (1.0 + gamma));
      for (std::size_t k = 0; k < n; ++k) worst_op = std::max(worst_op, std::abs(c[k] - u[k]));
    }
    out.push_back({"correction_mass_identity", worst_mass, 1e-12, 0.0, 0.0, worst_mass <= 1e-12});
    out.push_back({"correction_equals_update", worst_op, 1e-15, 0.0, 0.0, worst_op <= 1e-15});
  }
  {  // Residual mass outside G halves when q*(G) = 1 and gamma = 1.
    auto rng = root.split("residual");
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const std::size_t n = 4 + rng.below(30);
      auto q = detail::random_pair(n, rng).first;
      auto g = detail::random_subset(n, rng);
      std::size_t inside = 0;
      while (!g[inside]) ++inside;
      const auto q_star = ProposalDistribution::point_mass(n, inside);
      const auto c = correction_operator(q, q_star, 1.0);
      worst = std::max(worst, std::abs((1.0 - c.mass(g)) - (1.0 - q.mass(g)) / 2.0));
    }
    out.push_back({"residual_mass_halves", worst, 1e-12, 0.0, 0.0, worst <= 1e-12});
  }
  {  // Gibbs reference: uniform at beta = 0, shift invariant.
    auto rng = root.split("gibbs");
    std::vector<AttackConfig> configs(50);
    std::vector<double> u(50), shifted(50);
    for (std::size_t i = 0; i < 50; ++i) {
      configs[i].seed = i;
      u[i] = rng.uniform(-1.0, 1.0);
      shifted[i] = u[i] + 3.7;
    }
    const auto m = UtilityMap::from(configs, u);
    const auto q0 = gibbs_reference(m, 0.0);
    double dev = 0.0;
    for (std::size_t i = 0; i < 50; ++i) dev = std::max(dev, std::abs(q0[i] - 1.0 / 50.0));
    out.push_back({"gibbs_uniform_at_beta0", dev, 1e-15, 0.0, 0.0, dev <= 1e-15});
    const auto qa = gibbs_reference(m, 5.0);
    const auto qb = gibbs_reference(UtilityMap::from(configs, shifted), 5.0);
    double shift = 0.0;
    for (std::size_t i = 0; i < 50; ++i) shift = std::max(shift, std::abs(qa[i] - qb[i]));
    out.push_back({"gibbs_shift_invariance", shift, 1e-12, 0.0, 0.0, shift <= 1e-12});

    bool monotone = true;
    EffectiveSet prev = effective_set(m, 0.0);
    for (double eta = 0.05; eta <= 2.0; eta += 0.05) {
      const auto next = effective_set(m, eta);
      for (std::size_t i = 0; i < 50; ++i) monotone = monotone && (!prev.members[i] || next.members[i]);
      prev = next;
    }
    out.push_back({"effective_set_monotone", monotone ? 1.0 : 0.0, 1.0, 0.0, 0.0, monotone});
  }
  {  // h(p, 1) = p and bound = 1/h.
    double worst = 0.0;
    for (int i = 1; i <= 100; ++i) {
      const double p = i / 100.0;
      worst = std::max(worst, std::abs(hit_probability(p, 1) - p));
      for (std::size_t b : {1U, 4U, 8U}) worst = std::max(worst, std::abs(hitting_time_bound(p, b) * hit_probability(p, b) - 1.0));
    }
    out.push_back({"hit_probability_identities", worst, 1e-12, 0.0, 0.0, worst <= 1e-12});
  }
  {  // Monte-Carlo hitting time against the geometric bound, fixed p.
    const std::size_t n = 100;
    std::vector<bool> g(n, false);
    for (std::size_t i = 0; i < 10; ++i) g[i] = true;  // uniform q: p = 0.1
    const auto q = ProposalDistribution::uniform(n);
    const auto rep = monte_carlo_hitting_time(q, g, 8, s.hitting_trials, root.split("hit"));
    const bool near = std::abs(rep.empirical - 1.0 / rep.h) <= 3.0 * rep.se;
    out.push_back({"hitting_time_fixed_p0.1_b8", 1.0 / rep.h, rep.bound, rep.empirical, rep.se, rep.pass && near});

    // Correction sequence: p_t grows each round, so the fixed-p bound at p_0 still holds.
    std::vector<ProposalDistribution> seq{q};
    const auto q_star = ProposalDistribution::point_mass(n, 0);
    for (int t = 0; t < 20; ++t) seq.push_back(correction_operator(seq.back(), q_star, 0.5));
    const auto rep2 = monte_carlo_hitting_time(seq, g, 8, s.hitting_trials, root.split("hit-seq"));
    out.push_back({"hitting_time_corrected_sequence", 1.0 / rep2.h, rep2.bound, rep2.empirical, rep2.se, rep2.pass});
  }
  {  // Noisy correction and baseline gap: closed form vs direct operator arithmetic.
    auto rng = root.split("noisy");
    double worst_gap = 0.0;
    bool verdicts_agree = true;
    for (int i = 0; i < 1000; ++i) {
      const std::size_t n = 3 + rng.below(30);
      auto [q, q_star] = detail::random_pair(n, rng);
      const auto g = detail::random_subset(n, rng);
      const double p = q.mass(g), r = q_star.mass(g);
      const double g1 = rng.uniform(0.0, 5.0), g2 = rng.uniform(0.0, 5.0);
      const double direct = correction_operator(q, q_star, g1).mass(g) - correction_operator(q, q_star, g2).mass(g);
      worst_gap = std::max(worst_gap, std::abs(direct - baseline_gap(p, r, g1, g2)));
      const double xi = rng.uniform(0.0, 0.3);
      const auto v = noisy_correction_check(p, r, g1, xi);
      const double realized = correction_operator(q, q_star, g1).mass(g) - xi;
      // Skip cases within rounding distance of the threshold.
      if (std::abs(v.slack) > 1e-12) verdicts_agree = verdicts_agree && (v.guaranteed == (realized > p));
    }
    out.push_back({"baseline_gap_dual_path", worst_gap, 1e-12, 0.0, 0.0, worst_gap <= 1e-12});
    out.push_back({"noisy_correction_dual_path", verdicts_agree ? 1.0 : 0.0, 1.0, 0.0, 0.0, verdicts_agree});
  }
  {  // Finite-episode coverage.
    ResponseSurfaceParams p;
    p.task_id = "coverage";
    p.theta = {0.3, 0.6, 0.4};
    p.noise = 0.05;
    const ResponseSurfaceVictim victim(p);
    const auto rep = coverage_experiment(victim, coverage_space(), s.coverage_episodes, s.delta, 0.05, s.coverage_trials, {},
                                         root.split("coverage"));
    out.push_back({"hoeffding_coverage", rep.frequency, 1.0 - s.delta, rep.max_deviation, rep.se, rep.pass});
  }
  return out;
}

inline void write_theory_table(std::ostream& os, const std::vector<TheoryCheck>& checks) {
  os << "name,computed,bound,empirical,se,verdict\n";
  for (const auto& c : checks)
    os << c.name << ',' << format_real(c.computed) << ',' << format_real(c.bound) << ',' << format_real(c.empirical) << ','
       << format_real(c.se) << ',' << (c.pass ? "PASS" : "FAIL") << '\n';
}

}  // namespace attacksearch
