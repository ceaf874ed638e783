#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attacksearch/errors.hpp"
#include "attacksearch/format.hpp"

namespace attacksearch {

enum class AttackFamily : std::uint8_t { ApgdCe, ApgdDlr, Fab, Square, PhysCondWma };
enum class AllocationRule : std::uint8_t { Fixed, MarginLinear };

inline constexpr std::array kAllFamilies{AttackFamily::ApgdCe, AttackFamily::ApgdDlr, AttackFamily::Fab,
                                         AttackFamily::Square, AttackFamily::PhysCondWma};

constexpr std::string_view to_string(AttackFamily f) noexcept {
  switch (f) {
    case AttackFamily::ApgdCe: return "apgd-ce";
    case AttackFamily::ApgdDlr: return "apgd-dlr";
    case AttackFamily::Fab: return "fab";
    case AttackFamily::Square: return "square";
    case AttackFamily::PhysCondWma: return "physcond-wma";
  }
  return "?";
}

constexpr std::string_view to_string(AllocationRule a) noexcept {
  return a == AllocationRule::Fixed ? "fixed" : "margin-linear";
}

inline std::optional<AttackFamily> parse_family(std::string_view s) {
  for (auto f : kAllFamilies)
    if (to_string(f) == s) return f;
  return std::nullopt;
}

inline std::optional<AllocationRule> parse_allocation(std::string_view s) {
  if (s == "fixed") return AllocationRule::Fixed;
  if (s == "margin-linear") return AllocationRule::MarginLinear;
  return std::nullopt;
}

/// One point of the search space. Field order is the canonical sort order.
struct AttackConfig {
  AttackFamily family = AttackFamily::ApgdCe;
  int epsilon = 8;  // pixel units, applied as epsilon/255
  int steps = 10;
  int restarts = 1;
  double rho = 0.75;
  std::uint64_t seed = 0;
  AllocationRule allocation = AllocationRule::Fixed;

  auto operator<=>(const AttackConfig&) const = default;
  bool operator==(const AttackConfig&) const = default;

  [[nodiscard]] bool well_formed() const noexcept {
    return epsilon >= 0 && steps >= 1 && restarts >= 1 && rho > 0.0 && rho <= 1.0;
  }
};

/// `family=apgd-ce;eps=8;steps=10;restarts=1;rho=0.75;seed=0;alloc=margin-linear`
inline std::string to_string(const AttackConfig& c) {
  std::string s;
  s.reserve(96);
  s += "family=";
  s += to_string(c.family);
  s += ";eps=" + std::to_string(c.epsilon);
  s += ";steps=" + std::to_string(c.steps);
  s += ";restarts=" + std::to_string(c.restarts);
  s += ";rho=" + format_real_short(c.rho);
  s += ";seed=" + std::to_string(c.seed);
  s += ";alloc=";
  s += to_string(c.allocation);
  return s;
}

/// Inverse of to_string(AttackConfig). Keys must appear exactly in canonical order.
inline AttackConfig parse_config(std::string_view text) {
  static constexpr std::array<std::string_view, 7> keys{"family", "eps", "steps", "restarts", "rho", "seed", "alloc"};
  AttackConfig c;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const auto end = k + 1 < keys.size() ? text.find(';', pos) : text.size();
    if (end == std::string_view::npos) throw ConfigError("config", "missing field '" + std::string(keys[k]) + "'");
    const auto item = text.substr(pos, end - pos);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || item.substr(0, eq) != keys[k])
      throw ConfigError("config", "expected key '" + std::string(keys[k]) + "' in '" + std::string(text) + "'");
    const auto value = item.substr(eq + 1);
    bool ok = true;
    switch (k) {
      case 0: {
        auto f = parse_family(value);
        ok = f.has_value();
        if (ok) c.family = *f;
        break;
      }
      case 1: ok = parse_int(value, c.epsilon); break;
      case 2: ok = parse_int(value, c.steps); break;
      case 3: ok = parse_int(value, c.restarts); break;
      case 4: ok = parse_real(value, c.rho); break;
      case 5: ok = parse_int(value, c.seed); break;
      case 6: {
        auto a = parse_allocation(value);
        ok = a.has_value();
        if (ok) c.allocation = *a;
        break;
      }
    }
    if (!ok) throw ConfigError(std::string(keys[k]), "bad value '" + std::string(value) + "'");
    pos = end + 1;
  }
  if (!c.well_formed()) throw ConfigError("config", "field out of range in '" + std::string(text) + "'");
  return c;
}

/// Candidate values for one attack family. Numeric lists strictly increasing.
struct FamilyGrid {
  AttackFamily family = AttackFamily::ApgdCe;
  std::vector<int> epsilons;
  std::vector<int> steps;
  std::vector<int> restarts{1};
  std::vector<double> rhos{0.75};
  std::vector<std::uint64_t> seeds{0};
  std::vector<AllocationRule> allocations{AllocationRule::Fixed, AllocationRule::MarginLinear};

  [[nodiscard]] std::size_t size() const noexcept {
    return epsilons.size() * steps.size() * restarts.size() * rhos.size() * seeds.size() * allocations.size();
  }
  bool operator==(const FamilyGrid&) const = default;
};

inline std::vector<int> int_range(int first, int last, int stride) {
  std::vector<int> v;
  for (int x = first; x <= last; x += stride) v.push_back(x);
  return v;
}

/// Finite configuration space: union over families of per-family Cartesian
/// products, indexed in canonical order.
class ConfigSpace {
 public:
  ConfigSpace() = default;

  explicit ConfigSpace(std::vector<FamilyGrid> grids) : grids_(std::move(grids)) {
    if (grids_.empty()) throw ConfigError("families", "no attack family in space");
    std::sort(grids_.begin(), grids_.end(), [](const auto& a, const auto& b) { return a.family < b.family; });
    for (std::size_t i = 0; i + 1 < grids_.size(); ++i)
      if (grids_[i].family == grids_[i + 1].family)
        throw ConfigError("families", "duplicate family " + std::string(to_string(grids_[i].family)));
    offsets_.reserve(grids_.size() + 1);
    offsets_.push_back(0);
    for (const auto& g : grids_) {
      validate_grid(g);
      offsets_.push_back(offsets_.back() + g.size());
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
  [[nodiscard]] const std::vector<FamilyGrid>& grids() const noexcept { return grids_; }

  [[nodiscard]] const FamilyGrid* grid(AttackFamily f) const noexcept {
    for (const auto& g : grids_)
      if (g.family == f) return &g;
    return nullptr;
  }

  /// Config at canonical position `index` (< size()).
  [[nodiscard]] AttackConfig at(std::size_t index) const {
    if (index >= size()) throw ArgumentError("config index out of range");
    const auto gi = static_cast<std::size_t>(std::upper_bound(offsets_.begin(), offsets_.end(), index) - offsets_.begin()) - 1;
    const auto& g = grids_[gi];
    std::size_t r = index - offsets_[gi];
    const auto take = [&r](std::size_t n) {
      const auto v = r % n;
      r /= n;
      return v;
    };
    AttackConfig c;
    c.family = g.family;
    c.allocation = g.allocations[take(g.allocations.size())];
    c.seed = g.seeds[take(g.seeds.size())];
    c.rho = g.rhos[take(g.rhos.size())];
    c.restarts = g.restarts[take(g.restarts.size())];
    c.steps = g.steps[take(g.steps.size())];
    c.epsilon = g.epsilons[take(g.epsilons.size())];
    return c;
  }

  /// Canonical position of `c`, or nullopt when off-grid.
  [[nodiscard]] std::optional<std::size_t> index_of(const AttackConfig& c) const noexcept {
    for (std::size_t gi = 0; gi < grids_.size(); ++gi) {
      const auto& g = grids_[gi];
      if (g.family != c.family) continue;
      const auto pe = find(g.epsilons, c.epsilon);
      const auto ps = find(g.steps, c.steps);
      const auto pr = find(g.restarts, c.restarts);
      const auto pho = find(g.rhos, c.rho);
      const auto pse = find(g.seeds, c.seed);
      const auto pa = find(g.allocations, c.allocation);
      if (!pe || !ps || !pr || !pho || !pse || !pa) return std::nullopt;
      std::size_t idx = *pe;
      idx = idx * g.steps.size() + *ps;
      idx = idx * g.restarts.size() + *pr;
      idx = idx * g.rhos.size() + *pho;
      idx = idx * g.seeds.size() + *pse;
      idx = idx * g.allocations.size() + *pa;
      return offsets_[gi] + idx;
    }
    return std::nullopt;
  }

  bool operator==(const ConfigSpace& o) const { return grids_ == o.grids_; }

 private:
  template <typename T>
  static std::optional<std::size_t> find(const std::vector<T>& v, const T& x) noexcept {
    const auto it = std::find(v.begin(), v.end(), x);
    if (it == v.end()) return std::nullopt;
    return static_cast<std::size_t>(it - v.begin());
  }

  template <typename T>
  static void require_increasing(const std::vector<T>& v, std::string_view family, std::string_view field) {
    const auto name = std::string(family) + "." + std::string(field);
    if (v.empty()) throw ConfigError(name, "empty grid");
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
      if (!(v[i] < v[i + 1])) throw ConfigError(name, "grid must be strictly increasing");
  }

  static void validate_grid(const FamilyGrid& g) {
    const auto fam = to_string(g.family);
    require_increasing(g.epsilons, fam, "eps");
    require_increasing(g.steps, fam, "steps");
    require_increasing(g.restarts, fam, "restarts");
    require_increasing(g.rhos, fam, "rho");
    require_increasing(g.seeds, fam, "seeds");
    require_increasing(g.allocations, fam, "alloc");
    if (g.epsilons.front() < 0) throw ConfigError(std::string(fam) + ".eps", "must be >= 0");
    if (g.steps.front() < 1) throw ConfigError(std::string(fam) + ".steps", "must be >= 1");
    if (g.restarts.front() < 1) throw ConfigError(std::string(fam) + ".restarts", "must be >= 1");
    if (g.rhos.front() <= 0.0 || g.rhos.back() > 1.0) throw ConfigError(std::string(fam) + ".rho", "must lie in (0, 1]");
  }

  std::vector<FamilyGrid> grids_;
  std::vector<std::size_t> offsets_;
};

/// Canonical enumeration of every configuration in `space`.
inline std::vector<AttackConfig> enumerate(const ConfigSpace& space) {
  std::vector<AttackConfig> out;
  out.reserve(space.size());
  for (const auto& g : space.grids())
    for (int e : g.epsilons)
      for (int s : g.steps)
        for (int r : g.restarts)
          for (double rho : g.rhos)
            for (auto seed : g.seeds)
              for (auto a : g.allocations) out.push_back({g.family, e, s, r, rho, seed, a});
  return out;
}

inline bool validate(const AttackConfig& c, const ConfigSpace& space) noexcept { return space.index_of(c).has_value(); }

/// Single-field, single-grid-position moves along eps, steps, restarts, rho and
/// allocation. Seed and family are never moved.
inline std::vector<AttackConfig> neighborhood(const AttackConfig& c, const ConfigSpace& space) {
  if (!validate(c, space)) throw PreconditionError("neighborhood: config not in space: " + to_string(c));
  const auto& g = *space.grid(c.family);
  std::vector<AttackConfig> out;
  const auto step_along = [&]<typename T>(const std::vector<T>& values, T AttackConfig::*field) {
    const auto pos = static_cast<std::size_t>(std::find(values.begin(), values.end(), c.*field) - values.begin());
    if (pos > 0) {
      auto n = c;
      n.*field = values[pos - 1];
      out.push_back(n);
    }
    if (pos + 1 < values.size()) {
      auto n = c;
      n.*field = values[pos + 1];
      out.push_back(n);
    }
  };
  step_along(g.epsilons, &AttackConfig::epsilon);
  step_along(g.steps, &AttackConfig::steps);
  step_along(g.restarts, &AttackConfig::restarts);
  step_along(g.rhos, &AttackConfig::rho);
  step_along(g.allocations, &AttackConfig::allocation);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Default per-family grids: eps in steps of 2, step counts in steps of 2
/// (Square: 20..160 in steps of 20), singleton restarts/rho/seed.
inline FamilyGrid default_grid(AttackFamily f) {
  FamilyGrid g;
  g.family = f;
  switch (f) {
    case AttackFamily::ApgdCe:
    case AttackFamily::ApgdDlr:
      g.epsilons = int_range(2, 20, 2);
      g.steps = int_range(4, 24, 2);
      break;
    case AttackFamily::Fab:
    case AttackFamily::PhysCondWma:
      g.epsilons = int_range(2, 20, 2);
      g.steps = int_range(6, 32, 2);
      break;
    case AttackFamily::Square:
      g.epsilons = int_range(2, 16, 2);
      g.steps = int_range(20, 160, 20);
      break;
  }
  return g;
}

inline ConfigSpace default_space() {
  std::vector<FamilyGrid> grids;
  for (auto f : kAllFamilies) grids.push_back(default_grid(f));
  return ConfigSpace(std::move(grids));
}

}  // namespace attacksearch
