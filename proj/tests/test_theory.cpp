#include <gtest/gtest.h>

#include <cmath>

#include "attacksearch/theory.hpp"
#include "attacksearch/theory_checks.hpp"

using namespace attacksearch;

namespace {

UtilityMap random_map(std::size_t n, Rng& rng) {
  std::vector<AttackConfig> c(n);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i].seed = i;
    u[i] = rng.uniform(-1.0, 1.0);
  }
  return UtilityMap::from(std::move(c), std::move(u));
}

ConfigSpace toy_space() {
  std::vector<FamilyGrid> g(2);
  g[0].family = AttackFamily::ApgdCe;
  g[1].family = AttackFamily::Square;
  for (auto& x : g) {
    x.epsilons = {4, 8, 16};
    x.steps = {10, 20};
  }
  return ConfigSpace(g);
}

}  // namespace

TEST(BruteForce, ToySpaceAndNestedLoopAgree) {
  const auto space = toy_space();
  ASSERT_EQ(space.size(), 24u);
  const ResponseSurfaceVictim v(surface_task_from_seed(4));
  const auto base = measure_baseline(v, 2, Rng(0));
  const auto m = brute_force_utility(v, space, base, {}, std::nullopt, Rng(1));
  ASSERT_EQ(m.size(), 24u);
  EXPECT_EQ(m.u_star, *std::max_element(m.utilities.begin(), m.utilities.end()));
  const auto nested = analytic_utility_map(v, default_space(), {});
  const auto full = brute_force_utility(v, default_space(), base, {}, std::nullopt, Rng(1));
  for (std::size_t i = 0; i < full.size(); ++i) EXPECT_NEAR(full.utilities[i], nested.utilities[i], 1e-12);
}

TEST(BruteForce, RefusesStochasticWithoutAveraging) {
  const ResponseSurfaceVictim v(surface_task_from_seed(4, 0.1));
  const auto base = measure_baseline(v, 2, Rng(0));
  EXPECT_THROW(brute_force_utility(v, toy_space(), base, {}, std::nullopt, Rng(1)), PreconditionError);
  EXPECT_EQ(brute_force_utility(v, toy_space(), base, {}, 3, Rng(1)).size(), 24u);
}

TEST(EffectiveSet, Examples) {
  Rng rng(3);
  const auto m = random_map(50, rng);
  const auto zero = effective_set(m, 0.0);
  EXPECT_EQ(zero.count(), 1u);
  EXPECT_TRUE(zero.members[m.argmax]);
  const double range = m.u_star - *std::min_element(m.utilities.begin(), m.utilities.end());
  EXPECT_EQ(effective_set(m, range).count(), 50u);
  const auto tenth = effective_set(m, 0.1);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(tenth.members[i], m.utilities[i] >= m.u_star - 0.1);
  EXPECT_THROW(effective_set(m, -0.1), ArgumentError);
  for (double a = 0.0; a < 1.0; a += 0.05) {
    const auto s1 = effective_set(m, a), s2 = effective_set(m, a + 0.05);
    for (std::size_t i = 0; i < 50; ++i) EXPECT_TRUE(!s1.members[i] || s2.members[i]);
  }
}

TEST(Gibbs, Examples) {
  Rng rng(4);
  auto m = random_map(30, rng);
  const auto flat = gibbs_reference(m, 0.0);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_NEAR(flat[i], 1.0 / 30.0, 1e-15);
  auto shifted = m.utilities;
  for (auto& u : shifted) u += 12.5;
  const auto a = gibbs_reference(m, 3.0);
  const auto b = gibbs_reference(UtilityMap::from(m.configs, shifted), 3.0);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  // Gap of 0.5 to every other config.
  std::vector<double> u(30, 0.0);
  u[7] = 0.5;
  EXPECT_GE(gibbs_reference(UtilityMap::from(m.configs, u), 50.0)[7], 1.0 - 1e-6);
}

TEST(HitProbability, Examples) {
  EXPECT_EQ(hit_probability(1.0, 5), 1.0);
  EXPECT_EQ(hitting_time_bound(1.0, 5), 1.0);
  EXPECT_NEAR(hit_probability(0.1, 8), 1.0 - std::pow(0.9, 8), 1e-15);
  EXPECT_NEAR(hit_probability(0.1, 8), 0.569533, 1e-6);
  EXPECT_NEAR(hitting_time_bound(0.1, 8), 1.0 / (1.0 - 0.43046721), 1e-15);
  EXPECT_NEAR(hitting_time_bound(0.1, 8), 1.755828, 5e-6);
  EXPECT_TRUE(std::isinf(hitting_time_bound(0.0, 8)));
  for (int i = 1; i < 100; ++i) {
    const double p = i / 100.0;
    EXPECT_GE(hit_probability(p, 4), hit_probability(p - 0.01, 4));
    EXPECT_GE(hit_probability(p, 1 + i), hit_probability(p, i));
    EXPECT_NEAR(hit_probability(p, 1), p, 1e-15);
  }
}

TEST(MonteCarloHitting, PointMassHitsImmediately) {
  const auto q = ProposalDistribution::point_mass(10, 3);
  std::vector<bool> g(10, false);
  g[3] = true;
  const auto r = monte_carlo_hitting_time(q, g, 2, 500, Rng(1));
  EXPECT_EQ(r.empirical, 1.0);
  EXPECT_EQ(r.se, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(MonteCarloHitting, FixedProposalMatchesGeometricMean) {
  const auto q = ProposalDistribution::uniform(100);
  std::vector<bool> g(100, false);
  for (int i = 0; i < 10; ++i) g[i * 10] = true;
  const auto r = monte_carlo_hitting_time(q, g, 8, 20000, Rng(2));
  EXPECT_NEAR(r.p, 0.1, 1e-12);
  EXPECT_LE(std::abs(r.empirical - r.bound), 3.0 * r.se);
  EXPECT_TRUE(r.pass);
}

TEST(MonteCarloHitting, CorrectedSequenceBeatsFixedBound) {
  std::vector<bool> g(50, false);
  for (int i = 0; i < 5; ++i) g[i] = true;
  std::vector<ProposalDistribution> seq{ProposalDistribution::uniform(50)};
  std::vector<double> ref(50, 0.0);
  for (int i = 0; i < 5; ++i) ref[i] = 0.2;
  const auto qs = ProposalDistribution::from_probabilities(ref);
  for (int t = 0; t < 20; ++t) seq.push_back(correction_operator(seq.back(), qs, 1.0));
  const auto r = monte_carlo_hitting_time(seq, g, 2, 20000, Rng(3));
  EXPECT_LE(r.empirical, r.bound + 3.0 * r.se);
  EXPECT_TRUE(r.pass);
}

TEST(NoisyCorrection, Examples) {
  EXPECT_TRUE(noisy_correction_check(0.2, 0.8, 1.0, 0.0).guaranteed);
  const auto v = noisy_correction_check(0.2, 0.8, 1.0, 0.3);
  EXPECT_NEAR(v.threshold, 0.3, 1e-15);
  EXPECT_FALSE(v.guaranteed);
  for (double xi : {0.0, 0.1, 1.0}) EXPECT_FALSE(noisy_correction_check(0.4, 0.4, 2.0, xi).guaranteed);
}

TEST(BaselineGap, Examples) {
  EXPECT_EQ(baseline_gap(0.2, 0.8, 1.3, 1.3), 0.0);
  EXPECT_NEAR(baseline_gap(0.2, 0.8, 2.0, 0.5), 0.2, 1e-15);
}

TEST(Hoeffding, Examples) {
  // Independent evaluation of the radius.
  const double root = std::sqrt(std::log(4.0 * 96.0 / 0.05) / 200.0);
  EXPECT_NEAR(hoeffding_bound(100, 0.05, 96, 0.0, 1.0, 0.0, 0.25), 1.0 * root + 0.25 * root, 1e-12);
  EXPECT_NEAR(hoeffding_bound(100, 0.05, 96, 0.0, 1.0, 0.0, 0.25), 0.2643739, 1e-6);
  EXPECT_NEAR(hoeffding_bound(40, 0.1, 96, 3.0, 3.0, 10.0, 0.25), 0.25 * std::sqrt(std::log(3840.0) / 80.0), 1e-15);
  EXPECT_LT(hoeffding_bound(100000000, 0.1, 1128, 0.0, 101.0, 100.0, 0.25), 1e-3);
  EXPECT_THROW(hoeffding_bound(0, 0.1, 96, 0.0, 1.0, 0.0, 0.25), ArgumentError);
  EXPECT_THROW(hoeffding_bound(10, 1.5, 96, 0.0, 1.0, 0.0, 0.25), ArgumentError);
  EXPECT_THROW(hoeffding_bound(10, 0.1, 96, 1.0, 0.0, 0.0, 0.25), ArgumentError);
}

TEST(Coverage, NoiselessIsExact) {
  const ResponseSurfaceVictim v(surface_task_from_seed(5));
  const auto r = coverage_experiment(v, coverage_space(), 5, 0.1, 0.05, 20, {}, Rng(1));
  EXPECT_LE(r.max_deviation, 1e-12);
  EXPECT_EQ(r.covered, 20u);
  EXPECT_TRUE(r.pass);
}

TEST(TheoryChecks, DefaultRunPasses) {
  TheoryCheckSettings s;
  s.hitting_trials = 4000;
  s.coverage_trials = 100;
  const auto checks = run_theory_checks(s);
  EXPECT_GE(checks.size(), 10u);
  for (const auto& c : checks) EXPECT_TRUE(c.pass) << c.name;
  std::ostringstream os;
  write_theory_table(os, checks);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "name,computed,bound,empirical,se,verdict");
}
