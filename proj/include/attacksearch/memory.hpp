#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "attacksearch/config_space.hpp"
#include "attacksearch/format.hpp"
#include "attacksearch/proposal.hpp"
#include "attacksearch/victim.hpp"

namespace attacksearch {

inline constexpr std::size_t kSummaryFeatures = 12;

/// Behavioral summary of a task's clean rollouts (raw, unnormalized features).
struct TaskSummary {
  std::string task_id;
  std::vector<double> psi;
  std::size_t horizon = 0;
  std::size_t episodes = 0;
};

namespace detail {
inline double l2(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}
inline double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}
inline double pop_std(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}
}  // namespace detail

/// Feature order: latent-norm mean, latent-norm std, one-step prediction error,
/// reward mean, reward std, lag-1 reward autocorrelation, action entropy
/// (discrete) or action std (continuous), mean policy margin, return mean,
/// return std, horizon fraction completed, positive-reward fraction.
inline TaskSummary summarize(const RolloutBatch& clean, const VictimDescriptor& desc) {
  std::vector<double> norms, rewards, margins, pred_err, actions;
  std::map<std::size_t, std::size_t> action_counts;
  double autocov = 0.0, var = 0.0;
  std::size_t steps = 0;
  for (const auto& traj : clean.trajectories) {
    for (std::size_t t = 0; t < traj.size(); ++t) {
      const auto& s = traj[t];
      norms.push_back(detail::l2(s.latent));
      rewards.push_back(s.reward);
      margins.push_back(s.margin);
      if (t + 1 < traj.size()) {
        double e = 0.0;
        for (std::size_t i = 0; i < s.predicted_next.size(); ++i) {
          const double d = s.predicted_next[i] - traj[t + 1].latent[i];
          e += d * d;
        }
        pred_err.push_back(std::sqrt(e));
      }
      if (desc.action_kind == ActionKind::Discrete) {
        ++action_counts[static_cast<std::size_t>(std::max_element(s.action.begin(), s.action.end()) - s.action.begin())];
      } else {
        actions.insert(actions.end(), s.action.begin(), s.action.end());
      }
    }
    steps += traj.size();
  }
  if (steps == 0) throw ArgumentError("summarize: empty trajectories");
  const double reward_mean = detail::mean_of(rewards);
  for (const auto& traj : clean.trajectories) {
    for (std::size_t t = 0; t < traj.size(); ++t) {
      const double a = traj[t].reward - reward_mean;
      var += a * a;
      if (t + 1 < traj.size()) autocov += a * (traj[t + 1].reward - reward_mean);
    }
  }
  double action_stat = 0.0;
  if (desc.action_kind == ActionKind::Discrete) {
    for (const auto& [_, n] : action_counts) {
      const double p = static_cast<double>(n) / static_cast<double>(steps);
      action_stat -= p * std::log(p);
    }
  } else {
    action_stat = detail::pop_std(actions);
  }
  const double positive = static_cast<double>(std::count_if(rewards.begin(), rewards.end(), [](double r) { return r > 0.0; }));
  TaskSummary s;
  s.task_id = desc.task_id;
  s.horizon = desc.horizon;
  s.episodes = clean.trajectories.size();
  s.psi = {detail::mean_of(norms),
           detail::pop_std(norms),
           detail::mean_of(pred_err),
           reward_mean,
           detail::pop_std(rewards),
           var > 0.0 ? autocov / var : 0.0,
           action_stat,
           detail::mean_of(margins),
           detail::mean_of(clean.returns),
           detail::pop_std(clean.returns),
           desc.horizon > 0 ? static_cast<double>(steps) / static_cast<double>(s.episodes * desc.horizon) : 1.0,
           positive / static_cast<double>(steps)};
  return s;
}

/// Cosine similarity; 0 when either vector has zero norm.
inline double similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("similarity: feature length mismatch");
  const double na = detail::l2(a), nb = detail::l2(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(std::inner_product(a.begin(), a.end(), b.begin(), 0.0) / (na * nb), -1.0, 1.0);
}

struct MemoryRecord {
  std::string task_id;
  std::vector<double> psi;  // raw features
  AttackConfig config;
  double utility = 0.0;
  double d = 0.0;
  double f = 0.0;
  std::uint64_t ts = 0;

  bool operator==(const MemoryRecord&) const = default;
};

/// Append-only store of past attack outcomes with per-feature z-score constants.
class AttackMemory {
 public:
  AttackMemory() = default;
  explicit AttackMemory(std::size_t feature_len) : feature_len_(feature_len) {}

  [[nodiscard]] const std::vector<MemoryRecord>& records() const noexcept { return records_; }
  [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
  [[nodiscard]] bool empty() const noexcept { return records_.empty(); }
  [[nodiscard]] std::size_t feature_len() const noexcept { return feature_len_; }
  [[nodiscard]] const std::vector<double>& feature_mean() const noexcept { return mean_; }
  [[nodiscard]] const std::vector<double>& feature_scale() const noexcept { return scale_; }

  /// Appends with the next timestamp. Normalization constants are not touched
  /// until refresh_normalization() (called by save and load).
  void insert(MemoryRecord rec) {
    if (feature_len_ == 0) feature_len_ = rec.psi.size();
    if (rec.psi.size() != feature_len_) throw ArgumentError("memory insert: psi length mismatch");
    if (!std::isfinite(rec.utility)) throw ArgumentError("memory insert: non-finite utility");
    rec.ts = records_.empty() ? 1 : records_.back().ts + 1;
    records_.push_back(std::move(rec));
  }

  void refresh_normalization() {
    mean_.assign(feature_len_, 0.0);
    scale_.assign(feature_len_, 1.0);
    if (records_.empty()) return;
    const double n = static_cast<double>(records_.size());
    for (const auto& r : records_)
      for (std::size_t i = 0; i < feature_len_; ++i) mean_[i] += r.psi[i] / n;
    std::vector<double> ss(feature_len_, 0.0);
    for (const auto& r : records_)
      for (std::size_t i = 0; i < feature_len_; ++i) ss[i] += (r.psi[i] - mean_[i]) * (r.psi[i] - mean_[i]);
    for (std::size_t i = 0; i < feature_len_; ++i) {
      const double sd = std::sqrt(ss[i] / n);
      scale_[i] = sd > 1e-12 ? sd : 1.0;
    }
  }

  /// Z-scored copy of `psi` under the frozen constants.
  [[nodiscard]] std::vector<double> normalize(std::span<const double> psi) const {
    if (psi.size() != feature_len_) throw ArgumentError("memory: psi length mismatch");
    std::vector<double> z(psi.begin(), psi.end());
    if (mean_.size() != feature_len_) return z;
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (z[i] - mean_[i]) / scale_[i];
    return z;
  }

  void save(const std::string& path) {
    refresh_normalization();
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write memory file " + path);
    for (const auto& r : records_) {
      os << "{\"task_id\":\"" << json_escape(r.task_id) << "\",\"psi\":[";
      for (std::size_t i = 0; i < r.psi.size(); ++i) os << (i ? "," : "") << format_real(r.psi[i]);
      os << "],\"config\":\"" << to_string(r.config) << "\",\"utility\":" << format_real(r.utility)
         << ",\"d\":" << format_real(r.d) << ",\"f\":" << format_real(r.f) << ",\"ts\":" << r.ts << "}\n";
    }
    if (!os) throw std::runtime_error("failed writing memory file " + path);
  }

  static AttackMemory load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read memory file " + path);
    AttackMemory m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      MemoryRecord r;
      try {
        const auto j = nlohmann::json::parse(line);
        r.task_id = j.at("task_id").get<std::string>();
        r.psi = j.at("psi").get<std::vector<double>>();
        r.config = parse_config(j.at("config").get<std::string>());
        r.utility = j.at("utility").get<double>();
        r.d = j.at("d").get<double>();
        r.f = j.at("f").get<double>();
        r.ts = j.at("ts").get<std::uint64_t>();
      } catch (const std::exception& e) {
        throw ParseError(lineno, std::string("corrupt memory record: ") + e.what());
      }
      if (m.feature_len_ == 0) m.feature_len_ = r.psi.size();
      if (r.psi.size() != m.feature_len_) throw ParseError(lineno, "psi length mismatch");
      if (!std::isfinite(r.utility)) throw ParseError(lineno, "non-finite utility");
      m.records_.push_back(std::move(r));
    }
    m.refresh_normalization();
    return m;
  }

 private:
  std::size_t feature_len_ = 0;
  std::vector<MemoryRecord> records_;
  std::vector<double> mean_, scale_;
};

struct Retrieved {
  const MemoryRecord* record = nullptr;
  double similarity = 0.0;
};

/// Top-K records by normalized cosine similarity; ties to earlier timestamp, then task id.
inline std::vector<Retrieved> retrieve_topk(const AttackMemory& memory, std::span<const double> psi, std::size_t k) {
  if (k == 0) throw ArgumentError("retrieve_topk: K must be >= 1");
  std::vector<Retrieved> all;
  if (memory.empty()) return all;
  const auto query = memory.normalize(psi);
  all.reserve(memory.size());
  for (const auto& r : memory.records()) all.push_back({&r, similarity(query, memory.normalize(r.psi))});
  const auto n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), [](const auto& a, const auto& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.record->ts != b.record->ts) return a.record->ts < b.record->ts;
    return a.record->task_id < b.record->task_id;
  });
  all.resize(n);
  return all;
}

struct WarmStart {
  ProposalDistribution q0;
  std::size_t skipped = 0;  // retrieved configs not in the space
};

/// q0 = (1 - lambda) q_base + lambda sum_i alpha_i delta(c_i), with
/// alpha = softmax(similarity + utility) over the retained records.
inline WarmStart warm_start(const ProposalDistribution& q_base, std::span<const Retrieved> retrieved, double lambda,
                            const ConfigSpace& space) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ArgumentError("warm_start: lambda must lie in [0, 1]");
  if (q_base.size() != space.size()) throw ArgumentError("warm_start: base proposal misaligned with space");
  WarmStart out;
  std::vector<std::size_t> idx;
  std::vector<double> score;
  for (const auto& r : retrieved) {
    if (const auto i = space.index_of(r.record->config)) {
      idx.push_back(*i);
      score.push_back(r.similarity + r.record->utility);
    } else {
      ++out.skipped;
    }
  }
  if (idx.empty() || lambda == 0.0) {
    out.q0 = q_base;
    return out;
  }
  const double mx = *std::max_element(score.begin(), score.end());
  double z = 0.0;
  for (auto& s : score) z += (s = std::exp(s - mx));
  std::vector<double> p(q_base.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = (1.0 - lambda) * q_base[i];
  for (std::size_t j = 0; j < idx.size(); ++j) p[idx[j]] += lambda * score[j] / z;
  out.q0 = ProposalDistribution::from_probabilities(std::move(p));
  return out;
}

}  // namespace attacksearch
