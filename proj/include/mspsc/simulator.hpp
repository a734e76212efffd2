#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mspsc/evaluation.hpp"

namespace mspsc {

struct AxisSensitivity {
  double attitude = 0.0;
  double energy = 0.0;
};

enum class CheckinPattern { consistent, inconsistent };
enum class ResponseShape { linear, banded };

using Missingness = std::map<SourceGroup, double>;

// Per-check-in drop probabilities used when a user spec omits them: the
// complement of typical source availability (weather 35.4%, calendar 10.5%,
// wearables 1.3% of check-ins).
Missingness default_missingness();
Missingness no_missingness();

struct UserSpec {
  std::string user_id = "sim-user";
  // Mood units per standard deviation of the factor's nominal distribution.
  std::map<std::string, AxisSensitivity, std::less<>> sensitivities;
  EmotionPoint base_mood{50.0, 50.0};
  double noise_sd = 0.0;
  CheckinPattern pattern = CheckinPattern::consistent;
  Missingness missingness = default_missingness();
  std::uint64_t seed = 1;
  ResponseShape response = ResponseShape::linear;

  // Throws Error{InvalidArgument}.
  void validate() const;
};

struct Scenario {
  std::vector<UserSpec> users;
  int days = 30;
  FactorRegistry registry = default_registry();
  Timestamp start = std::chrono::sys_days{std::chrono::year{2024} / 3 / 4};

  void validate() const;
  static Scenario from_json(const nlohmann::json& doc);
  static Scenario load(const std::filesystem::path& path);
};

// Time-ordered synthetic check-ins for one user. Environment, schedule, mood
// noise and missingness draw from separate streams derived from spec.seed, so
// changing only the missingness leaves every mood and timestamp unchanged.
std::vector<CheckIn> generate_checkins(const UserSpec& spec, int days, Timestamp start,
                                       const FactorRegistry& registry);

Dataset generate_dataset(const Scenario& scenario);

// Seed for user `index` of a scenario seeded with `scenario_seed`.
std::uint64_t derive_seed(std::uint64_t scenario_seed, std::uint64_t index) noexcept;

// Replays the generated dataset through every named model.
std::vector<EvalReport> run_scenario(const Scenario& scenario, const std::vector<std::string>& models,
                                     const EngineConfig& config = {},
                                     const EvalOptions& options = {});

}  // namespace mspsc
