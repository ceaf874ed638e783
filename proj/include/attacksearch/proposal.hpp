#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "attacksearch/errors.hpp"
#include "attacksearch/rng.hpp"

namespace attacksearch {

/// Explicit probability vector aligned with a space's canonical enumeration.
class ProposalDistribution {
 public:
  ProposalDistribution() = default;

  static ProposalDistribution uniform(std::size_t n) {
    if (n == 0) throw ArgumentError("proposal: empty support");
    ProposalDistribution q;
    q.p_.assign(n, 1.0 / static_cast<double>(n));
    return q;
  }

  static ProposalDistribution point_mass(std::size_t n, std::size_t index) {
    if (index >= n) throw ArgumentError("proposal: point mass outside support");
    ProposalDistribution q;
    q.p_.assign(n, 0.0);
    q.p_[index] = 1.0;
    return q;
  }

  /// Normalizes nonnegative weights with a positive total.
  static ProposalDistribution from_weights(std::vector<double> w) {
    double total = 0.0;
    for (double x : w) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw ArgumentError("proposal: weights must be finite and >= 0");
      total += x;
    }
    if (!(total > 0.0)) throw ArgumentError("proposal: weights sum to zero");
    for (auto& x : w) x /= total;
    ProposalDistribution q;
    q.p_ = std::move(w);
    return q;
  }

  /// Adopts an already-normalized vector as-is; checks it.
  static ProposalDistribution from_probabilities(std::vector<double> p) {
    ProposalDistribution q;
    q.p_ = std::move(p);
    if (!q.is_valid(1e-9)) throw ArgumentError("proposal: not a probability vector");
    return q;
  }

  [[nodiscard]] std::size_t size() const noexcept { return p_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const noexcept { return p_[i]; }
  [[nodiscard]] std::span<const double> probabilities() const noexcept { return p_; }
  [[nodiscard]] std::size_t support_size() const noexcept {
    return static_cast<std::size_t>(std::count_if(p_.begin(), p_.end(), [](double x) { return x > 0.0; }));
  }

  /// Total probability of the member mask.
  [[nodiscard]] double mass(const std::vector<bool>& members) const {
    if (members.size() != p_.size()) throw ArgumentError("proposal: subset mask misaligned");
    double m = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i)
      if (members[i]) m += p_[i];
    return m;
  }

  [[nodiscard]] bool is_valid(double tol = 1e-12) const noexcept {
    if (p_.empty()) return false;
    double s = 0.0;
    for (double x : p_) {
      if (!(x >= 0.0)) return false;
      s += x;
    }
    return std::abs(s - 1.0) <= tol;
  }

  /// One categorical draw.
  std::size_t sample(Rng& rng) const {
    double u = rng.uniform() * std::accumulate(p_.begin(), p_.end(), 0.0);
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      if (p_[i] <= 0.0) continue;
      last_positive = i;
      if (u < p_[i]) return i;
      u -= p_[i];
    }
    return last_positive;
  }

  bool operator==(const ProposalDistribution&) const = default;

 private:
  std::vector<double> p_;
};

/// (1 - alpha) q + alpha q_hat, componentwise.
inline ProposalDistribution update(const ProposalDistribution& q, const ProposalDistribution& q_hat, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("update: alpha must lie in [0, 1]");
  if (q.size() != q_hat.size()) throw ArgumentError("update: misaligned supports");
  if (alpha == 0.0) return q;
  if (alpha == 1.0) return q_hat;
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - alpha) * q[i] + alpha * q_hat[i];
  return ProposalDistribution::from_probabilities(std::move(out));
}

/// C_gamma(q) = (q + gamma q*) / (1 + gamma)
inline ProposalDistribution correction_operator(const ProposalDistribution& q, const ProposalDistribution& q_star,
                                                double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ArgumentError("correction_operator: gamma must be >= 0");
  if (q.size() != q_star.size()) throw ArgumentError("correction_operator: misaligned supports");
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (q[i] + gamma * q_star[i]) / (1.0 + gamma);
  return ProposalDistribution::from_probabilities(std::move(out));
}

}  // namespace attacksearch
