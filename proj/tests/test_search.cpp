#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "attacksearch/bench.hpp"
#include "attacksearch/search.hpp"
#include "attacksearch/theory.hpp"
#include "attacksearch/theory_checks.hpp"

using namespace attacksearch;

namespace {

ConfigSpace small_space(std::size_t n_eps) {
  std::vector<FamilyGrid> g(1);
  g[0].epsilons = int_range(2, static_cast<int>(2 * n_eps), 2);
  g[0].steps = {10};
  g[0].allocations = {AllocationRule::Fixed};
  return ConfigSpace(g);
}

UtilityReport report(double d, double f, double t, double v) {
  UtilityReport r;
  r.d = d;
  r.f = f;
  r.t = t;
  r.v = v;
  r.u = scalarize(d, f, t, v);
  return r;
}

}  // namespace

TEST(Proposal, UpdateExamples) {
  const auto q = ProposalDistribution::from_probabilities({0.2, 0.8});
  const auto h = ProposalDistribution::from_probabilities({0.6, 0.4});
  const auto m = update(q, h, 0.5);
  EXPECT_NEAR(m[0], 0.4, 1e-15);
  EXPECT_NEAR(m[1], 0.6, 1e-15);
  EXPECT_EQ(update(q, h, 0.0).probabilities()[1], 0.8);
  EXPECT_EQ(update(q, h, 1.0).probabilities()[0], 0.6);
  EXPECT_THROW(update(q, ProposalDistribution::uniform(3), 0.5), ArgumentError);
}

TEST(Proposal, CorrectionExamples) {
  const auto q = ProposalDistribution::from_probabilities({0.2, 0.3, 0.5});
  const auto qs = ProposalDistribution::from_probabilities({0.8, 0.1, 0.1});
  const std::vector<bool> g{true, false, false};
  EXPECT_EQ(correction_operator(q, qs, 0.0).probabilities()[2], 0.5);
  const auto c = correction_operator(q, qs, 1.0);
  EXPECT_NEAR(c.mass(g), 0.5, 1e-15);
  EXPECT_NEAR(c.mass(g) - q.mass(g), 0.3, 1e-15);
  const auto one = correction_operator(q, ProposalDistribution::point_mass(3, 0), 1.0);
  EXPECT_NEAR(1.0 - one.mass(g), (1.0 - q.mass(g)) / 2.0, 1e-15);
  EXPECT_THROW(correction_operator(q, qs, -0.1), ArgumentError);
}

TEST(Proposal, CorrectionEqualsUpdateAndMassIdentity) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto n = 2 + rng.below(30);
    auto [q, qs] = detail::random_pair(n, rng);
    const auto g = detail::random_subset(n, rng);
    const double gamma = rng.uniform(0.0, 5.0);
    const auto c = correction_operator(q, qs, gamma);
    const auto u = update(q, qs, gamma / (1.0 + gamma));
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(c[k], u[k], 1e-15);
    EXPECT_NEAR(c.mass(g) - q.mass(g), gamma / (1.0 + gamma) * (qs.mass(g) - q.mass(g)), 1e-12);
    EXPECT_TRUE(c.is_valid(1e-12));
  }
}

TEST(ProposeBatch, Examples) {
  std::vector<bool> none(4, false);
  Rng rng(2);
  auto b = propose_batch(ProposalDistribution::point_mass(4, 2), 1, none, rng);
  EXPECT_EQ(b, std::vector<std::size_t>{2});
  b = propose_batch(ProposalDistribution::uniform(4), 4, none, rng);
  EXPECT_EQ(b, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_TRUE(propose_batch(ProposalDistribution::uniform(4), 2, std::vector<bool>(4, true), rng).empty());
}

TEST(ProposeBatch, InclusionFrequency) {
  const auto q = ProposalDistribution::uniform(100);
  std::vector<bool> none(100, false);
  std::vector<int> count(100, 0);
  const Rng root(3);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const auto b = propose_batch(q, 8, none, root.split(static_cast<std::uint64_t>(t)));
    ASSERT_EQ(std::set<std::size_t>(b.begin(), b.end()).size(), 8u);
    for (auto i : b) ++count[i];
  }
  const double p = 0.08, se = std::sqrt(p * (1 - p) / trials);
  int outside = 0;
  for (int c : count) outside += std::abs(c / double(trials) - p) > 3 * se;
  // Each of 100 cells falls outside 3 SE with probability ~0.0027.
  EXPECT_LE(outside, 3);
}

TEST(Feedback, Examples) {
  const auto strong = feedback(report(0.9, 0.8, 0.5, 0.01));
  EXPECT_EQ(strong.tags, 0u);
  EXPECT_TRUE(strong.neutral());
  const auto weak = feedback(report(0.0, 0.1, 0.0, 0.0));
  EXPECT_TRUE(weak.has(kWeakDrop));
  EXPECT_TRUE(weak.has(kLowFlip));
  EXPECT_EQ(weak.epsilon_dir, 1);
  EXPECT_TRUE(weak.toggle_allocation);
  // w_r ln(1+T) = 0.6 > D + w_f F = 0.5
  const double t = std::exp(0.6 / 0.15) - 1.0;
  const auto costly = feedback(report(0.4, 0.4, t, 0.0));
  EXPECT_TRUE(costly.has(kHighCost));
  EXPECT_EQ(costly.steps_dir, -1);
  EXPECT_EQ(tags_string(weak), "weak-drop|low-flip");
}

TEST(InducedProposal, Examples) {
  const auto space = small_space(5);
  EXPECT_THROW(induced_proposal({}, space, 1.0, 0.0), ArgumentError);
  std::vector<HistoryEntry> h(3);
  const double us[] = {0.1, 0.7, 0.2};
  const std::size_t idx[] = {0, 2, 4};
  for (int i = 0; i < 3; ++i) {
    h[i].index = idx[i];
    h[i].scout = report(0.5, 0.5, 0.0, 0.0);
    h[i].scout.u = us[i];
    h[i].scout.config = space.at(idx[i]);
  }
  const auto flat = induced_proposal(h, space, 0.0, 0.0);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(flat[i], i % 2 == 0 ? 1.0 / 3.0 : 0.0, 1e-15);
  const auto sharp = induced_proposal(h, space, 50.0, 0.0);
  EXPECT_GE(sharp[2], 1.0 - 1e-6);
  // One entry, spread 1: half on itself, half over its two neighbors.
  const auto one = induced_proposal(std::span(h).subspan(1, 1), space, 1.0, 1.0);
  EXPECT_NEAR(one[2], 0.5, 1e-15);
  EXPECT_NEAR(one[1], 0.25, 1e-15);
  EXPECT_NEAR(one[3], 0.25, 1e-15);
}

TEST(RunSearch, ExhaustiveBudgetFindsArgmax) {
  const auto space = coverage_space();
  const ResponseSurfaceVictim v(surface_task_from_seed(12));
  const auto base = measure_baseline(v, 2, Rng(0));
  SearchParams p;
  p.budget = space.size();
  const auto res = run_search(v, space, p, ProposalDistribution::uniform(space.size()), base);
  const auto oracle = brute_force_utility(v, space, base, {}, std::nullopt, Rng(0));
  EXPECT_EQ(res.best_config, oracle.configs[oracle.argmax]);
  EXPECT_EQ(res.history.entries.size(), space.size());
}

TEST(RunSearch, BudgetOneEvaluatesOneSample) {
  const auto space = coverage_space();
  const ResponseSurfaceVictim v(surface_task_from_seed(13));
  const auto base = measure_baseline(v, 2, Rng(0));
  SearchParams p;
  p.budget = 1;
  p.batch = 1;
  const auto res = run_search(v, space, p, ProposalDistribution::point_mass(space.size(), 17), base);
  ASSERT_EQ(res.history.entries.size(), 1u);
  EXPECT_EQ(res.best_config, space.at(17));
}

TEST(RunSearch, BudgetClampedWithWarning) {
  const auto space = small_space(5);
  const ResponseSurfaceVictim v(surface_task_from_seed(14));
  const auto base = measure_baseline(v, 2, Rng(0));
  SearchParams p;
  p.budget = 16;
  const auto res = run_search(v, space, p, ProposalDistribution::uniform(5), base);
  EXPECT_EQ(res.history.entries.size(), 5u);
  EXPECT_EQ(res.history.warnings.size(), 1u);
}

TEST(RunSearch, InvariantsAndDeterminism) {
  const auto space = default_space();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ResponseSurfaceVictim v(surface_task_from_seed(seed, 0.05));
    const auto base = measure_baseline(v, 2, Rng(seed));
    SearchParams p;
    p.seed = seed;
    p.record_proposals = true;
    const auto a = run_search(v, space, p, ProposalDistribution::uniform(space.size()), base);
    const auto b = run_search(v, space, p, ProposalDistribution::uniform(space.size()), base);
    std::ostringstream la, lb;
    write_history(la, a.history, "t", "m");
    write_history(lb, b.history, "t", "m");
    EXPECT_EQ(la.str(), lb.str());
    std::set<std::size_t> distinct;
    for (const auto& e : a.history.entries) distinct.insert(e.index);
    EXPECT_EQ(distinct.size(), p.budget);
    for (std::size_t r = 1; r < a.history.best_per_round.size(); ++r)
      EXPECT_GE(a.history.best_per_round[r], a.history.best_per_round[r - 1]);
    for (const auto& q : a.proposals) EXPECT_TRUE(q.is_valid(1e-12));
  }
}

TEST(RunSearch, WarmStartBeatsRandomOnNoiselessFamily) {
  const auto space = coverage_space();
  const std::size_t seeds = 200;
  std::size_t wins_round1 = 0;
  std::vector<double> mean_rgar(4, 0.0), mean_rand(4, 0.0);
  const std::size_t memory_tasks = 40;
  for (std::size_t s = 0; s < seeds; ++s) {
    const auto family = surface_family(memory_tasks + 1, s, 0.0);
    AttackMemory memory(kSummaryFeatures);
    for (std::size_t i = 0; i < memory_tasks; ++i) memory.insert(oracle_record(ResponseSurfaceVictim(family[i]), space, {}));
    memory.refresh_normalization();
    const ResponseSurfaceVictim v(family.back());
    SearchParams p;
    p.seed = s;
    const auto base = measure_baseline(v, 2, Rng(s));
    const auto a = run_method(Method::WMAttack, v, space, p, &memory, {}, base, {});
    const auto b = run_method(Method::Random, v, space, p, &memory, {}, base, {});
    ASSERT_EQ(a.history.best_per_round.size(), 4u);
    for (std::size_t r = 0; r < 4; ++r) {
      mean_rgar[r] += a.history.best_per_round[r] / seeds;
      mean_rand[r] += b.history.best_per_round[r] / seeds;
    }
    wins_round1 += a.history.best_per_round[0] > b.history.best_per_round[0];
  }
  for (std::size_t r = 0; r < 4; ++r) EXPECT_GE(mean_rgar[r], mean_rand[r]) << "round " << r + 1;
  EXPECT_GE(wins_round1, 160u);
}
