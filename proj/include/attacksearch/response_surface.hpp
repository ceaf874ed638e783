#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "attacksearch/victim.hpp"

namespace attacksearch {

/// Task parameters of a response-surface victim. Nearby `theta` values give
/// nearby optimal configurations.
struct ResponseSurfaceParams {
  std::string task_id = "surface-0";
  std::array<double, 3> theta{0.5, 0.5, 0.5};
  double j_clean = 100.0;
  /// Return-noise std at the reference budget, in units of |J_clean|+1. Zero
  /// makes the victim deterministic (flip rate reported as its expectation).
  double noise = 0.0;
  std::size_t horizon = 20;
  std::size_t latent_dim = 6;

  bool operator==(const ResponseSurfaceParams&) const = default;
};

/// Draws theta uniformly in [0,1]^3 from a task seed.
inline ResponseSurfaceParams surface_task_from_seed(std::uint64_t task_seed, double noise = 0.0) {
  Rng rng(task_seed);
  auto r = rng.split("theta");
  ResponseSurfaceParams p;
  p.task_id = "surface-" + std::to_string(task_seed);
  p.theta = {r.uniform(), r.uniform(), r.uniform()};
  p.noise = noise;
  return p;
}

/// Analytic victim: attacked returns are J_clean*(1 - D*(c)) plus bounded
/// uniform noise of std sigma(c); each decision point flips with probability
/// F*(c); each episode costs T*(c) virtual seconds.
class ResponseSurfaceVictim final : public Victim {
 public:
  explicit ResponseSurfaceVictim(ResponseSurfaceParams params) : params_(std::move(params)) {
    desc_.task_id = params_.task_id;
    desc_.action_kind = ActionKind::Discrete;
    desc_.action_dim = 4;
    desc_.horizon = params_.horizon;
  }

  [[nodiscard]] const VictimDescriptor& descriptor() const noexcept override { return desc_; }
  [[nodiscard]] const ResponseSurfaceParams& params() const noexcept { return params_; }
  [[nodiscard]] double j_clean() const noexcept { return params_.j_clean; }
  [[nodiscard]] bool deterministic() const noexcept override { return params_.noise == 0.0; }

  /// Ground-truth expected fractional return loss, in [0, 1].
  [[nodiscard]] double expected_drop(const AttackConfig& c) const noexcept {
    const auto [a, b, tc] = params_.theta;
    const double fi = family_index(c.family);
    const double height = 0.55 + 0.35 * std::cos(2.0 * std::numbers::pi * (a - fi / 5.0));
    const double mu_eps = std::clamp(0.2 + 0.6 * b + 0.04 * (fi - 2.0), 0.0, 1.0);
    const double mu_steps = 0.2 + 0.6 * tc;
    const double de = (eps_norm(c) - mu_eps) / 0.22;
    const double ds = (steps_norm(c) - mu_steps) / 0.25;
    double d = height * std::exp(-0.5 * (de * de + ds * ds));
    if (c.allocation == AllocationRule::MarginLinear) d *= 1.0 + 0.12 * (2.0 * tc - 1.0);
    d *= 1.0 + 0.04 * std::min(c.restarts - 1, 5);
    d *= 1.0 - 0.1 * (c.rho - 0.75) * (c.rho - 0.75);
    return std::clamp(d, 0.0, 1.0);
  }

  /// Per-step flip probability; non-decreasing in epsilon.
  [[nodiscard]] double flip_probability(const AttackConfig& c) const noexcept {
    const double fi = family_index(c.family);
    const double gain = 0.55 + 0.3 * std::cos(2.0 * std::numbers::pi * (params_.theta[0] - fi / 5.0 - 0.1));
    return std::clamp(0.05 + 0.8 * gain * std::pow(std::min(eps_norm(c), 1.5), 0.8), 0.0, 1.0);
  }

  /// Virtual seconds per attacked episode.
  [[nodiscard]] double episode_seconds(const AttackConfig& c) const noexcept {
    static constexpr std::array<double, 5> per_step{0.5, 0.5, 0.6, 0.08, 0.8};
    double t = per_step[family_index(c.family)] * c.steps * c.restarts;
    if (c.allocation == AllocationRule::MarginLinear) t *= 0.75;
    return t;
  }

  /// Standard deviation of the attacked-return noise.
  [[nodiscard]] double return_sigma(const AttackConfig& c) const noexcept {
    return params_.noise * (std::abs(params_.j_clean) + 1.0) * (0.5 + 0.5 * std::min(eps_norm(c), 1.5));
  }

  [[nodiscard]] std::optional<std::pair<double, double>> return_bounds() const noexcept override {
    const double half_width = std::sqrt(3.0) * params_.noise * (std::abs(params_.j_clean) + 1.0) * 1.25;
    return std::pair{std::min(0.0, params_.j_clean) - half_width, std::max(0.0, params_.j_clean) + half_width};
  }

  [[nodiscard]] RolloutBatch attacked_rollout(const AttackConfig& c, std::size_t episodes, Rng rng) const override {
    if (episodes == 0) throw ArgumentError("attacked_rollout: episodes must be >= 1");
    RolloutBatch out;
    const double mean = params_.j_clean * (1.0 - expected_drop(c));
    const double half_width = std::sqrt(3.0) * return_sigma(c);
    const double flip_p = flip_probability(c);
    auto stream = rng.split(c.seed);
    out.returns.resize(episodes, mean);
    if (deterministic()) {
      out.flip_expectation = flip_p;
    } else {
      auto noise = stream.split("returns");
      for (auto& r : out.returns) r += noise.uniform(-half_width, half_width);
      auto flips = stream.split("flips");
      out.flips.reserve(episodes * params_.horizon);
      for (std::size_t i = 0; i < episodes * params_.horizon; ++i) out.flips.push_back(flips.bernoulli(flip_p));
    }
    out.virtual_seconds = episode_seconds(c) * static_cast<double>(episodes);
    return out;
  }

  /// Clean returns equal J_clean exactly; trajectories are synthesized from
  /// theta so that behavioral summaries vary smoothly across tasks.
  [[nodiscard]] RolloutBatch clean_rollout(std::size_t episodes, Rng rng) const override {
    if (episodes == 0) throw ArgumentError("clean_rollout: episodes must be >= 1");
    const auto [a, b, c] = params_.theta;
    const std::size_t h = params_.horizon;
    const std::size_t k = params_.latent_dim;
    const double omega = 0.3 + 0.5 * a;
    const double amp = 0.5 + b;
    const double reward_amp = 0.2 + 0.6 * c;
    const double sharp = 1.0 + 3.0 * a;
    const double pred_err = 0.05 + 0.3 * c;
    const std::array<double, 6> base{a, b, c, a * b, 1.0 - c, 0.5};

    RolloutBatch out;
    out.returns.assign(episodes, params_.j_clean);
    out.trajectories.resize(episodes);
    for (std::size_t e = 0; e < episodes; ++e) {
      auto ep = rng.split(e);
      const double phase = 0.05 * ep.uniform(-1.0, 1.0);
      const auto latent_at = [&](std::size_t t) {
        std::vector<double> z(k);
        for (std::size_t i = 0; i < k; ++i)
          z[i] = 2.0 * base[i % base.size()] + amp * std::sin(omega * static_cast<double>(t) + static_cast<double>(i) + phase);
        return z;
      };
      // Rewards oscillate around J/H with zero-sum deviation so the return is J.
      std::vector<double> wave(h);
      double wave_mean = 0.0;
      for (std::size_t t = 0; t < h; ++t) {
        wave[t] = std::sin(omega * (1.0 + b) * static_cast<double>(t) + phase);
        wave_mean += wave[t] / static_cast<double>(h);
      }
      auto& traj = out.trajectories[e];
      traj.reserve(h);
      for (std::size_t t = 0; t < h; ++t) {
        StepRecord s;
        s.latent = latent_at(t);
        s.predicted_next = latent_at(t + 1);
        for (std::size_t i = 0; i < k; ++i) s.predicted_next[i] += pred_err * std::cos(1.7 * static_cast<double>(t + i));
        std::array<double, 4> logits{};
        for (std::size_t u = 0; u < 4; ++u) logits[u] = sharp * s.latent[u % k] * (u % 2 == 0 ? 1.0 : -0.5);
        const double mx = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        s.policy.resize(4);
        for (std::size_t u = 0; u < 4; ++u) z += (s.policy[u] = std::exp(logits[u] - mx));
        for (auto& p : s.policy) p /= z;
        const auto best = static_cast<std::size_t>(std::max_element(s.policy.begin(), s.policy.end()) - s.policy.begin());
        s.action.assign(4, 0.0);
        s.action[best] = 1.0;
        auto sorted = s.policy;
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        s.margin = sorted[0] - sorted[1];
        const double unit = params_.j_clean / static_cast<double>(h);
        s.reward = unit + std::abs(unit) * reward_amp * (wave[t] - wave_mean);
        traj.push_back(std::move(s));
      }
    }
    out.virtual_seconds = 0.01 * static_cast<double>(episodes * h);
    return out;
  }

 private:
  static std::size_t family_index(AttackFamily f) noexcept { return static_cast<std::size_t>(f); }

  static double eps_norm(const AttackConfig& c) noexcept { return c.epsilon / 20.0; }

  /// Step count mapped to [0, 1] over the family's default step range.
  static double steps_norm(const AttackConfig& c) noexcept {
    switch (c.family) {
      case AttackFamily::ApgdCe:
      case AttackFamily::ApgdDlr: return (c.steps - 4) / 20.0;
      case AttackFamily::Fab:
      case AttackFamily::PhysCondWma: return (c.steps - 6) / 26.0;
      case AttackFamily::Square: return (c.steps - 20) / 140.0;
    }
    return 0.0;
  }

  ResponseSurfaceParams params_;
  VictimDescriptor desc_;
};

}  // namespace attacksearch
