#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "attacksearch/victim.hpp"

namespace attacksearch {

struct LinearVictimParams {
  std::string task_id = "linear-0";
  std::uint64_t task_seed = 0;
  std::size_t obs_dim = 64;  // two channels (agent, goal) of obs_dim/2 cells
  std::size_t latent_dim = 6;
  std::size_t horizon = 40;
  ActionKind action_kind = ActionKind::Discrete;
  /// Virtual seconds per loss/gradient evaluation and per environment step.
  double cost_per_gradient = 1e-3;
  double cost_per_env_step = 1e-4;
  /// Continuous flip threshold as a fraction of the action range.
  double kappa_fraction = 0.05;

  bool operator==(const LinearVictimParams&) const = default;
};

enum class LossKind { CrossEntropy, Dlr, LatentConsistency, ContinuousShift };

/// Row-major dense matrix, just enough for the linear victim.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  [[nodiscard]] std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) y[r] = std::inner_product(x.begin(), x.end(), data.begin() + static_cast<std::ptrdiff_t>(r * cols), 0.0);
    return y;
  }
  [[nodiscard]] std::vector<double> apply_transpose(std::span<const double> y) const {
    std::vector<double> x(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) x[c] += data[r * cols + c] * y[r];
    return x;
  }
  bool operator==(const Matrix&) const = default;
};

/// Outcome of attacking one decision point.
struct AttackStepResult {
  std::vector<double> perturbed;
  bool flipped = false;
  std::vector<double> clean_action;
  std::vector<double> attacked_action;
  std::size_t loss_evaluations = 0;
};

/// Per-decision context needed by the latent-consistency loss.
struct AttackContext {
  std::vector<double> predicted_latent;  // f(z_{t-1}, u_{t-1}); empty at t = 0
};

/// Corridor gridworld seen through a rendered observation, a linear encoder,
/// linear latent dynamics and a linear-softmax (or linear continuous) policy.
/// Discrete actions: 0 = left, 1 = stay, 2 = right.
class LinearWorldModelVictim final : public Victim {
 public:
  explicit LinearWorldModelVictim(LinearVictimParams params) : p_(std::move(params)) {
    if (p_.obs_dim < 8 || p_.obs_dim % 2 != 0) throw ArgumentError("linear victim: obs_dim must be even and >= 8");
    if (p_.latent_dim < 2) throw ArgumentError("linear victim: latent_dim must be >= 2");
    if (p_.horizon == 0) throw ArgumentError("linear victim: horizon must be >= 1");
    cells_ = p_.obs_dim / 2;
    desc_.task_id = p_.task_id;
    desc_.action_kind = p_.action_kind;
    desc_.action_dim = p_.action_kind == ActionKind::Discrete ? 3 : 1;
    desc_.horizon = p_.horizon;
    build();
  }

  [[nodiscard]] const VictimDescriptor& descriptor() const noexcept override { return desc_; }
  [[nodiscard]] const LinearVictimParams& params() const noexcept { return p_; }
  [[nodiscard]] bool deterministic() const noexcept override { return false; }
  [[nodiscard]] std::optional<std::pair<double, double>> return_bounds() const noexcept override {
    const auto h = static_cast<double>(p_.horizon);
    return std::pair{-h, h};
  }
  [[nodiscard]] std::size_t goal() const noexcept { return goal_; }
  [[nodiscard]] double kappa() const noexcept { return p_.kappa_fraction * 2.0; }

  // Model parameters, exposed for non-interference checks.
  [[nodiscard]] const Matrix& encoder() const noexcept { return encoder_; }
  [[nodiscard]] const Matrix& dynamics() const noexcept { return dynamics_; }
  [[nodiscard]] const Matrix& policy_weights() const noexcept { return policy_; }

  /// Rendered observation for agent position `pos` (real, in cell units).
  [[nodiscard]] std::vector<double> render(double pos) const {
    std::vector<double> o(p_.obs_dim);
    for (std::size_t i = 0; i < cells_; ++i) {
      const double w = std::max(0.0, 1.0 - std::abs(static_cast<double>(i) - pos));
      o[i] = -0.5 + 0.1 * texture_[i] + 0.8 * w;
      o[cells_ + i] = -0.5 + 0.1 * texture_[cells_ + i] + 0.8 * (i == goal_ ? 1.0 : 0.0);
    }
    return o;
  }

  [[nodiscard]] std::vector<double> encode(std::span<const double> o) const {
    auto z = encoder_.apply(o);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += encoder_bias_[i];
    return z;
  }

  /// Policy head: logits (discrete) or pre-clamp action (continuous).
  [[nodiscard]] std::vector<double> head(std::span<const double> z) const {
    auto y = policy_.apply(z);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += policy_bias_[i];
    return y;
  }

  [[nodiscard]] std::vector<double> predict_next(std::span<const double> z, std::span<const double> action) const {
    auto zn = dynamics_.apply(z);
    const double move = movement(action);
    zn[0] += move / static_cast<double>(cells_ - 1);
    return zn;
  }

  /// Action vector chosen from policy-head output.
  [[nodiscard]] std::vector<double> act(std::span<const double> y) const {
    if (p_.action_kind == ActionKind::Continuous) return {std::clamp(y[0], -1.0, 1.0)};
    std::vector<double> a(3, 0.0);
    a[argmax(y)] = 1.0;
    return a;
  }

  /// Loss on a candidate attacked observation and its gradient with respect to
  /// that observation. `reference` is the clean head output.
  double loss(LossKind kind, std::span<const double> obs, std::span<const double> reference, const AttackContext& ctx,
              std::vector<double>* grad) const {
    const auto z = encode(obs);
    const auto y = head(z);
    std::vector<double> dy(y.size(), 0.0);
    std::vector<double> dz(z.size(), 0.0);
    double value = 0.0;
    switch (kind) {
      case LossKind::CrossEntropy:
      case LossKind::LatentConsistency: {
        // log-sum-exp minus the target logit, kept accurate when the policy saturates
        const auto target = argmax(reference);
        const auto top = argmax(y);
        const auto probs = softmax(y);
        double rest = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
          if (i != top) rest += std::exp(y[i] - y[top]);
        value = (y[top] - y[target]) + std::log1p(rest);
        double off_target = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
          if (i == target) continue;
          dy[i] = probs[i];
          off_target += probs[i];
        }
        dy[target] = -off_target;
        if (kind == LossKind::LatentConsistency && !ctx.predicted_latent.empty()) {
          for (std::size_t i = 0; i < z.size(); ++i) {
            const double diff = z[i] - ctx.predicted_latent[i];
            value += 0.5 * diff * diff;
            dz[i] += diff;
          }
        }
        break;
      }
      case LossKind::Dlr: {
        const auto target = argmax(reference);
        std::vector<std::size_t> order(y.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return y[a] > y[b]; });
        std::size_t other = order[0] == target ? order[1] : order[0];
        const double numer = y[target] - y[other];
        const double denom = y[order[0]] - y[order[2]] + 1e-12;
        value = -numer / denom;
        dy[target] -= 1.0 / denom;
        dy[other] += 1.0 / denom;
        dy[order[0]] += numer / (denom * denom);
        dy[order[2]] -= numer / (denom * denom);
        break;
      }
      case LossKind::ContinuousShift: {
        for (std::size_t i = 0; i < y.size(); ++i) {
          const double diff = y[i] - reference[i];
          value += 0.5 * diff * diff;
          dy[i] = diff;
        }
        break;
      }
    }
    if (grad != nullptr) {
      const auto back = policy_.apply_transpose(dy);
      for (std::size_t i = 0; i < dz.size(); ++i) dz[i] += back[i];
      *grad = encoder_.apply_transpose(dz);
    }
    return value;
  }

  /// Attacks one decision point with `config`, returning the perturbed
  /// observation and clean/attacked actions.
  [[nodiscard]] AttackStepResult run_attack_step(std::span<const double> obs, const AttackConfig& config,
                                                 const AttackContext& ctx, Rng rng) const {
    if (!config.well_formed()) throw PreconditionError("run_attack_step: malformed config " + to_string(config));
    AttackStepResult res;
    const auto clean_y = head(encode(obs));
    res.clean_action = act(clean_y);
    std::vector<double> delta(obs.size(), 0.0);
    if (config.epsilon > 0) {
      int steps = config.steps;
      if (config.allocation == AllocationRule::MarginLinear)
        steps = static_cast<int>(std::ceil(1.0 + (config.steps - 1) * margin_of(clean_y)));
      double best_loss = -std::numeric_limits<double>::infinity();
      for (int r = 0; r < config.restarts; ++r) {
        auto restart_rng = rng.split(static_cast<std::uint64_t>(r));
        auto cand = run_family(obs, clean_y, config, steps, r, ctx, restart_rng, res.loss_evaluations);
        const auto cand_obs = apply_perturbation(obs, cand, config.epsilon);
        const double l = loss(primary_loss(config.family), cand_obs, clean_y, ctx, nullptr);
        ++res.loss_evaluations;
        if (l > best_loss) {
          best_loss = l;
          delta = std::move(cand);
        }
      }
    }
    res.perturbed = apply_perturbation(obs, delta, config.epsilon);
    res.attacked_action = act(head(encode(res.perturbed)));
    res.flipped = is_flip(res.clean_action, res.attacked_action);
    return res;
  }

  [[nodiscard]] bool is_flip(std::span<const double> clean, std::span<const double> attacked) const {
    if (p_.action_kind == ActionKind::Discrete) return argmax(clean) != argmax(attacked);
    double l1 = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) l1 += std::abs(clean[i] - attacked[i]);
    return l1 > kappa();
  }

  [[nodiscard]] RolloutBatch clean_rollout(std::size_t episodes, Rng rng) const override {
    return rollout(nullptr, episodes, rng);
  }

  [[nodiscard]] RolloutBatch attacked_rollout(const AttackConfig& config, std::size_t episodes, Rng rng) const override {
    return rollout(&config, episodes, rng);
  }

  /// Normalized top-2 probability gap (discrete); 1 for continuous policies.
  [[nodiscard]] double margin_of(std::span<const double> y) const {
    if (p_.action_kind == ActionKind::Continuous) return 1.0;
    auto probs = softmax(y);
    std::sort(probs.begin(), probs.end(), std::greater<>());
    return probs[0] - probs[1];
  }

  static std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  }

  static std::vector<double> softmax(std::span<const double> y) {
    const double mx = *std::max_element(y.begin(), y.end());
    std::vector<double> p(y.size());
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (p[i] = std::exp(y[i] - mx));
    for (auto& v : p) v /= s;
    return p;
  }

 private:
  [[nodiscard]] LossKind primary_loss(AttackFamily f) const noexcept {
    if (p_.action_kind == ActionKind::Continuous) return LossKind::ContinuousShift;
    switch (f) {
      case AttackFamily::ApgdDlr: return LossKind::Dlr;
      case AttackFamily::PhysCondWma: return LossKind::LatentConsistency;
      default: return LossKind::CrossEntropy;
    }
  }

  [[nodiscard]] double movement(std::span<const double> action) const {
    if (p_.action_kind == ActionKind::Continuous) return action[0];
    return static_cast<double>(argmax(action)) - 1.0;
  }

  /// Projects delta so that obs + delta stays in the eps ball and the box.
  static void project(std::span<const double> obs, std::vector<double>& delta, double bound) {
    for (std::size_t i = 0; i < delta.size(); ++i)
      delta[i] = std::clamp(obs[i] + std::clamp(delta[i], -bound, bound), -0.5, 0.5) - obs[i];
  }

  static std::vector<double> add(std::span<const double> a, std::span<const double> b) {
    std::vector<double> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
  }

  std::vector<double> run_family(std::span<const double> obs, std::span<const double> clean_y, const AttackConfig& c,
                                 int steps, int restart, const AttackContext& ctx, Rng& rng,
                                 std::size_t& evals) const {
    const double bound = c.epsilon / 255.0;
    const auto kind = primary_loss(c.family);
    std::vector<double> delta(obs.size(), 0.0);
    // The first restart starts from the clean input unless the loss gradient vanishes there.
    if (restart > 0 || kind == LossKind::ContinuousShift || c.family == AttackFamily::Square) {
      for (auto& d : delta) d = rng.uniform(-bound, bound);
      project(obs, delta, bound);
    }
    switch (c.family) {
      case AttackFamily::ApgdCe:
      case AttackFamily::ApgdDlr:
      case AttackFamily::PhysCondWma: return apgd(obs, clean_y, c, steps, kind, ctx, std::move(delta), evals);
      case AttackFamily::Fab: return fab(obs, clean_y, steps, bound, std::move(delta), evals);
      case AttackFamily::Square: return square(obs, clean_y, steps, bound, kind, ctx, std::move(delta), rng, evals);
    }
    return delta;
  }

  /// Sign-gradient ascent. The first iteration from a zero start takes a full
  /// eps/255 step; later steps use eps/(4*255), halved at each checkpoint where
  /// the fraction of improving steps falls below rho.
  std::vector<double> apgd(std::span<const double> obs, std::span<const double> clean_y, const AttackConfig& c, int steps,
                           LossKind kind, const AttackContext& ctx, std::vector<double> delta, std::size_t& evals) const {
    const double bound = c.epsilon / 255.0;
    const bool zero_start = std::all_of(delta.begin(), delta.end(), [](double d) { return d == 0.0; });
    double step = bound / 4.0;
    const int checkpoint = std::max(1, (steps + 3) / 4);
    std::vector<double> grad;
    double current = loss(kind, add(obs, delta), clean_y, ctx, &grad);
    ++evals;
    auto best = delta;
    double best_loss = current;
    int improved = 0;
    for (int it = 0; it < steps; ++it) {
      const double eta = (it == 0 && zero_start) ? bound : step;
      for (std::size_t i = 0; i < delta.size(); ++i) delta[i] += eta * (grad[i] > 0 ? 1.0 : (grad[i] < 0 ? -1.0 : 0.0));
      project(obs, delta, bound);
      const double next = loss(kind, add(obs, delta), clean_y, ctx, &grad);
      ++evals;
      if (next > current) ++improved;
      current = next;
      if (current > best_loss) {
        best_loss = current;
        best = delta;
      }
      if ((it + 1) % checkpoint == 0) {
        if (static_cast<double>(improved) / checkpoint < c.rho) step *= 0.5;
        improved = 0;
      }
    }
    return best;
  }

  /// Minimal L-infinity step onto the nearest linear decision boundary,
  /// iterated under box clamping, then projected to the eps ball.
  std::vector<double> fab(std::span<const double> obs, std::span<const double> clean_y, int steps, double bound,
                          std::vector<double> delta, std::size_t& evals) const {
    const double overshoot = 1.02;
    std::vector<double> work = delta;
    for (int it = 0; it < steps; ++it) {
      const auto y = head(encode(add(obs, work)));
      ++evals;
      std::vector<double> best_step;
      double best_norm = std::numeric_limits<double>::infinity();
      if (p_.action_kind == ActionKind::Discrete) {
        const auto target = argmax(clean_y);
        if (argmax(y) != target) break;
        for (std::size_t j = 0; j < y.size(); ++j) {
          if (j == target) continue;
          std::vector<double> w(policy_.rows, 0.0);
          w[target] = 1.0;
          w[j] = -1.0;
          const auto g = encoder_.apply_transpose(policy_.apply_transpose(w));
          const double l1 = std::accumulate(g.begin(), g.end(), 0.0, [](double s, double v) { return s + std::abs(v); });
          if (l1 <= 0.0) continue;
          const double gap = y[target] - y[j];
          const double norm = overshoot * gap / l1;
          if (norm < best_norm) {
            best_norm = norm;
            best_step.assign(g.size(), 0.0);
            for (std::size_t i = 0; i < g.size(); ++i) best_step[i] = -norm * (g[i] > 0 ? 1.0 : (g[i] < 0 ? -1.0 : 0.0));
          }
        }
      } else {
        const double shift = y[0] - clean_y[0];
        const double needed = overshoot * kappa() - std::abs(shift);
        if (needed <= 0.0) break;
        std::vector<double> w{clean_y[0] > 0.0 ? -1.0 : 1.0};
        const auto g = encoder_.apply_transpose(policy_.apply_transpose(w));
        const double l1 = std::accumulate(g.begin(), g.end(), 0.0, [](double s, double v) { return s + std::abs(v); });
        if (l1 <= 0.0) break;
        const double norm = needed / l1;
        best_step.assign(g.size(), 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) best_step[i] = norm * (g[i] > 0 ? 1.0 : (g[i] < 0 ? -1.0 : 0.0));
      }
      if (best_step.empty()) break;
      for (std::size_t i = 0; i < work.size(); ++i) work[i] += best_step[i];
      project(obs, work, 1.0);
    }
    project(obs, work, bound);
    return work;
  }

  /// Random contiguous-block sign proposals accepted on loss increase. Block
  /// length follows a geometric schedule over the iteration budget.
  std::vector<double> square(std::span<const double> obs, std::span<const double> clean_y, int steps, double bound,
                             LossKind kind, const AttackContext& ctx, std::vector<double> delta, Rng& rng,
                             std::size_t& evals) const {
    for (auto& d : delta) d = rng.bernoulli(0.5) ? bound : -bound;
    project(obs, delta, bound);
    double current = loss(kind, add(obs, delta), clean_y, ctx, nullptr);
    ++evals;
    const auto dim = delta.size();
    for (int it = 0; it < steps; ++it) {
      const int phase = std::min(3, 4 * it / std::max(1, steps));
      const double frac = 0.3 * std::pow(0.5, phase);
      const auto len = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(frac * static_cast<double>(dim))));
      const auto start = rng.below(dim - len + 1);
      const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
      auto cand = delta;
      for (std::size_t i = start; i < start + len; ++i) cand[i] = sign * bound;
      project(obs, cand, bound);
      const double l = loss(kind, add(obs, cand), clean_y, ctx, nullptr);
      ++evals;
      if (l > current) {
        current = l;
        delta = std::move(cand);
      }
    }
    return delta;
  }

  RolloutBatch rollout(const AttackConfig* config, std::size_t episodes, Rng rng) const {
    if (episodes == 0) throw ArgumentError("rollout: episodes must be >= 1");
    const auto wall_start = std::chrono::steady_clock::now();
    RolloutBatch out;
    out.returns.reserve(episodes);
    out.trajectories.resize(episodes);
    std::size_t evals = 0;
    std::size_t env_steps = 0;
    const auto attack_rng = config ? rng.split(config->seed ^ 0xA77AC4ULL) : rng;
    const double last_cell = static_cast<double>(cells_ - 1);
    for (std::size_t e = 0; e < episodes; ++e) {
      auto ep_rng = rng.split(e);
      double pos = static_cast<double>(ep_rng.below(cells_));
      double ret = 0.0;
      AttackContext ctx;
      for (std::size_t t = 0; t < p_.horizon; ++t) {
        const auto obs = render(pos);
        StepRecord rec;
        std::vector<double> action;
        if (config != nullptr) {
          auto step = run_attack_step(obs, *config, ctx, attack_rng.split(e * 1'000'003ULL + t));
          evals += step.loss_evaluations;
          out.flips.push_back(step.flipped);
          out.clean_observations.push_back(obs);
          out.attacked_observations.push_back(step.perturbed);
          rec.latent = encode(step.perturbed);
          action = std::move(step.attacked_action);
        } else {
          rec.latent = encode(obs);
          action = act(head(rec.latent));
        }
        const auto y = head(rec.latent);
        rec.policy = p_.action_kind == ActionKind::Discrete ? softmax(y) : y;
        rec.margin = margin_of(y);
        rec.predicted_next = predict_next(rec.latent, action);
        ctx.predicted_latent = rec.predicted_next;
        pos = std::clamp(pos + movement(action), 0.0, last_cell);
        rec.reward = 1.0 - 2.0 * std::abs(pos - static_cast<double>(goal_)) / last_cell;
        ret += rec.reward;
        rec.action = std::move(action);
        out.trajectories[e].push_back(std::move(rec));
        ++env_steps;
      }
      out.returns.push_back(ret);
    }
    out.virtual_seconds = static_cast<double>(evals) * p_.cost_per_gradient + static_cast<double>(env_steps) * p_.cost_per_env_step;
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return out;
  }

  void build() {
    Rng rng(p_.task_seed);
    auto r = rng.split("model");
    goal_ = static_cast<std::size_t>(r.below(cells_));
    texture_.resize(p_.obs_dim);
    for (auto& t : texture_) t = r.uniform();
    const double last_cell = static_cast<double>(cells_ - 1);
    const std::size_t k = p_.latent_dim;

    // z0 = agent position / (cells-1), z1 = goal position / (cells-1),
    // remaining latents are small random projections.
    encoder_ = Matrix(k, p_.obs_dim);
    encoder_bias_.assign(k, 0.0);
    for (std::size_t ch = 0; ch < 2; ++ch) {
      for (std::size_t i = 0; i < cells_; ++i) {
        const double w = static_cast<double>(i) / last_cell / 0.8;
        const std::size_t col = ch * cells_ + i;
        encoder_(ch, col) = w;
        encoder_bias_[ch] -= w * (-0.5 + 0.1 * texture_[col]);
      }
    }
    for (std::size_t row = 2; row < k; ++row)
      for (std::size_t col = 0; col < p_.obs_dim; ++col) encoder_(row, col) = 0.02 * r.uniform(-1.0, 1.0);

    dynamics_ = Matrix(k, k);
    dynamics_(0, 0) = 1.0;
    dynamics_(1, 1) = 1.0;
    for (std::size_t i = 2; i < k; ++i) dynamics_(i, i) = 0.9;

    const double sharp = r.uniform(1.5, 3.0) * last_cell;
    if (p_.action_kind == ActionKind::Discrete) {
      policy_ = Matrix(3, k);
      policy_bias_.assign(3, 0.0);
      const double offset = 0.5 * sharp / last_cell;
      policy_(0, 0) = sharp;
      policy_(0, 1) = -sharp;
      policy_bias_[0] = -offset;
      policy_(2, 0) = -sharp;
      policy_(2, 1) = sharp;
      policy_bias_[2] = -offset;
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t i = 2; i < k; ++i) policy_(a, i) = 0.1 * r.uniform(-1.0, 1.0);
    } else {
      policy_ = Matrix(1, k);
      policy_bias_.assign(1, 0.0);
      // Moves a fixed fraction of the remaining distance per step.
      const double gain = sharp / r.uniform(2.5, 5.0);
      policy_(0, 0) = -gain;
      policy_(0, 1) = gain;
      for (std::size_t i = 2; i < k; ++i) policy_(0, i) = 0.1 * r.uniform(-1.0, 1.0);
    }
  }

  LinearVictimParams p_;
  VictimDescriptor desc_;
  std::size_t cells_ = 0;
  std::size_t goal_ = 0;
  std::vector<double> texture_;
  Matrix encoder_;
  std::vector<double> encoder_bias_;
  Matrix dynamics_;
  Matrix policy_;
  std::vector<double> policy_bias_;
};

}  // namespace attacksearch
