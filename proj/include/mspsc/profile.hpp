#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mspsc/factors.hpp"

namespace mspsc {

struct EngineConfig {
  std::size_t k = 5;          // cluster size for the per-factor vote
  double eps = kDefaultTolerance;
  double theta = 0.8;         // keep candidates scoring >= theta * best
  std::size_t n_max = 5;      // candidates presented at most
  std::int64_t w_init = 1;    // starting personalization weight
  std::int64_t reset_floor = 0;  // weight after a miss; 0 is the faithful reset

  // Throws Error{InvalidArgument}.
  void validate() const;

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

// Per-user knobs that override the deployment's EngineConfig.
struct ConfigOverrides {
  std::optional<std::size_t> k;
  std::optional<double> eps;
  std::optional<double> theta;
  std::optional<std::size_t> n_max;

  bool empty() const noexcept { return !k && !eps && !theta && !n_max; }
  EngineConfig apply(EngineConfig base) const;

  nlohmann::json to_json() const;
  static ConfigOverrides from_json(const nlohmann::json& doc);

  friend bool operator==(const ConfigOverrides&, const ConfigOverrides&) = default;
};

struct PersonalWeights {
  std::map<std::string, std::int64_t, std::less<>> weights;
  std::int64_t feedback_rounds = 0;
  std::int64_t init = 1;

  // Factors without an entry report the initial weight.
  std::int64_t value(std::string_view factor_id) const noexcept {
    auto it = weights.find(factor_id);
    return it == weights.end() ? init : it->second;
  }

  nlohmann::json to_json() const;

  friend bool operator==(const PersonalWeights&, const PersonalWeights&) = default;
};

PersonalWeights initial_weights(const FactorRegistry& registry, std::int64_t w_init);

struct UserProfile {
  std::string user_id;
  std::vector<CheckIn> history;  // strictly increasing `at`
  PersonalWeights weights;
  ConfigOverrides overrides;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

UserProfile make_profile(std::string user_id, const FactorRegistry& registry,
                         const EngineConfig& config);

}  // namespace mspsc
