#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attacksearch/config_space.hpp"
#include "attacksearch/errors.hpp"
#include "attacksearch/rng.hpp"

namespace attacksearch {

enum class ActionKind { Discrete, Continuous };

/// One decision point of a rollout.
struct StepRecord {
  std::vector<double> latent;          // z_t
  std::vector<double> predicted_next;  // f(z_t, u_t)
  std::vector<double> action;          // one-hot (discrete) or action vector (continuous)
  std::vector<double> policy;          // action probabilities (discrete) or pre-clamp output (continuous)
  double reward = 0.0;
  double margin = 0.0;  // normalized top-2 gap in [0, 1]
};

struct RolloutBatch {
  std::vector<double> returns;
  /// Attacked rollouts only: one entry per evaluated decision point.
  std::vector<bool> flips;
  /// Set by victims that know the exact per-step flip probability (noiseless
  /// analytic victims); evaluation uses it in place of the indicator mean.
  std::optional<double> flip_expectation;
  /// Deterministic virtual-clock seconds charged for the batch.
  double virtual_seconds = 0.0;
  /// Measured wall-clock seconds; logged only.
  double wall_seconds = 0.0;
  /// trajectories[e][t]
  std::vector<std::vector<StepRecord>> trajectories;
  /// Observation-space victims record every clean/attacked observation pair, flattened per step.
  std::vector<std::vector<double>> clean_observations;
  std::vector<std::vector<double>> attacked_observations;
};

struct VictimDescriptor {
  std::string task_id;
  ActionKind action_kind = ActionKind::Discrete;
  std::size_t action_dim = 0;  // action count (discrete) or dimension (continuous)
  std::size_t horizon = 0;
};

/// Fixed victim agent behind a rollout interface. Both rollout functions are
/// const and bit-reproducible for equal arguments and generator state.
class Victim {
 public:
  virtual ~Victim() = default;

  [[nodiscard]] virtual const VictimDescriptor& descriptor() const noexcept = 0;
  [[nodiscard]] virtual RolloutBatch clean_rollout(std::size_t episodes, Rng rng) const = 0;
  [[nodiscard]] virtual RolloutBatch attacked_rollout(const AttackConfig& config, std::size_t episodes, Rng rng) const = 0;

  /// True when attacked_rollout statistics do not depend on the generator.
  [[nodiscard]] virtual bool deterministic() const noexcept = 0;

  /// Known bounds on episodic return, when the victim can state them.
  [[nodiscard]] virtual std::optional<std::pair<double, double>> return_bounds() const noexcept { return std::nullopt; }
};

/// Bounded L-infinity observation attack: clamp(o + clip(delta, +-eps/255), -0.5, 0.5).
inline std::vector<double> apply_perturbation(std::span<const double> observation, std::span<const double> delta,
                                              int epsilon) {
  if (epsilon < 0) throw ArgumentError("apply_perturbation: negative epsilon");
  if (observation.size() != delta.size()) throw ArgumentError("apply_perturbation: dimension mismatch");
  const double bound = epsilon / 255.0;
  std::vector<double> out(observation.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::clamp(observation[i] + std::clamp(delta[i], -bound, bound), -0.5, 0.5);
  return out;
}

}  // namespace attacksearch
