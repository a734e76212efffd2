#include "mspsc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "mspsc/error.hpp"

namespace mspsc {
namespace {

using namespace std::chrono;

struct Nominal {
  double mean;
  double sd;
};

// Scale used to standardize each simulated factor before applying sensitivities.
const std::map<std::string, Nominal, std::less<>>& nominals() {
  static const std::map<std::string, Nominal, std::less<>> table{
      {"temperature_c", {12.0, 8.0}},   {"precipitation_mm", {1.75, 4.0}},
      {"cloud_cover_pct", {45.0, 30.0}}, {"event_count_day", {3.1, 2.2}},
      {"busy_hours_day", {4.5, 3.5}},    {"steps_day", {8000.0, 2500.0}},
      {"sleep_hours", {7.0, 1.0}},       {"resting_hr", {62.0, 4.0}},
  };
  return table;
}

double condition_level(const std::string& token) {
  if (token == "clear") return 1.0;
  if (token == "cloudy") return 0.0;
  if (token == "fog" || token == "snow") return -0.5;
  if (token == "rain") return -1.0;
  if (token == "storm") return -1.5;
  return 0.0;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct DayEnv {
  double temp_anomaly = 0.0;
  double precipitation = 0.0;
  double cloud = 0.0;
  double events = 0.0;
  double busy = 0.0;
  double steps = 8000.0;
  double sleep = 7.0;
  double resting_hr = 62.0;
};

std::vector<Timestamp> schedule(CheckinPattern pattern, int days, Timestamp start,
                                std::mt19937_64& rng) {
  std::vector<Timestamp> at;
  std::uniform_int_distribution<int> four_hours(0, 4 * 60 - 1);
  const Timestamp day0 = start_of_day(start);
  if (pattern == CheckinPattern::consistent) {
    for (int d = 0; d < days; ++d) {
      const Timestamp base = day0 + std::chrono::days{d};
      at.push_back(base + hours{7} + minutes{four_hours(rng)});
      at.push_back(base + hours{17} + minutes{four_hours(rng)});
    }
  } else {
    std::uniform_int_distribution<int> first(0, 1);
    std::uniform_int_distribution<int> extra_gap(0, 2);
    std::uniform_int_distribution<int> ten_hours(0, 10 * 60 - 1);
    for (int d = first(rng); d < days; d += 2 + extra_gap(rng)) {
      at.push_back(day0 + std::chrono::days{d} + hours{9} + minutes{ten_hours(rng)});
    }
  }
  return at;
}

std::vector<DayEnv> day_environment(int days, std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::exponential_distribution<double> rain_amount(1.0 / 5.0);
  std::vector<DayEnv> out(static_cast<std::size_t>(days));
  DayEnv prev;
  for (int d = 0; d < days; ++d) {
    DayEnv e;
    e.temp_anomaly = 0.6 * prev.temp_anomaly + 3.0 * unit(rng);
    const bool rainy = uniform(rng) < 0.35;
    const double amount = rain_amount(rng);
    e.precipitation = rainy ? std::min(amount, 120.0) : 0.0;
    const double cloud_draw = uniform(rng);
    e.cloud = rainy ? 70.0 + 30.0 * cloud_draw : 80.0 * cloud_draw;
    out[static_cast<std::size_t>(d)] = e;
    prev = e;
  }
  return out;
}

}  // namespace

Missingness default_missingness() {
  return {{SourceGroup::weather, 0.646}, {SourceGroup::calendar, 0.895}, {SourceGroup::fitness, 0.987}};
}

Missingness no_missingness() {
  return {{SourceGroup::weather, 0.0}, {SourceGroup::calendar, 0.0}, {SourceGroup::fitness, 0.0}};
}

std::uint64_t derive_seed(std::uint64_t scenario_seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(scenario_seed) ^ (index + 1));
}

void UserSpec::validate() const {
  if (user_id.empty()) throw Error(Errc::InvalidArgument, "user_id must not be empty");
  if (!base_mood.valid()) throw Error(Errc::InvalidArgument, "base_mood outside [0,100]^2");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw Error(Errc::InvalidArgument, "noise_sd must be finite and >= 0");
  }
  for (const auto& [group, p] : missingness) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(Errc::InvalidArgument,
                  "missingness for " + std::string(to_string(group)) + " outside [0,1]");
    }
  }
  for (const auto& [id, s] : sensitivities) {
    if (!std::isfinite(s.attitude) || !std::isfinite(s.energy)) {
      throw Error(Errc::InvalidArgument, "sensitivity for '" + id + "' is not finite");
    }
  }
}

void Scenario::validate() const {
  if (days < 1) throw Error(Errc::InvalidArgument, "days must be >= 1");
  for (const auto& u : users) {
    u.validate();
    for (const auto& [id, s] : u.sensitivities) {
      if (registry.find(id) == nullptr) throw Error(Errc::UnknownFactor, id);
    }
  }
}

std::vector<CheckIn> generate_checkins(const UserSpec& spec, int days, Timestamp start,
                                       const FactorRegistry& registry) {
  spec.validate();
  if (days < 1) throw Error(Errc::InvalidArgument, "days must be >= 1");

  std::mt19937_64 env_rng(derive_seed(spec.seed, 0));
  std::mt19937_64 sched_rng(derive_seed(spec.seed, 1));
  std::mt19937_64 noise_rng(derive_seed(spec.seed, 2));
  std::mt19937_64 miss_rng(derive_seed(spec.seed, 3));

  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  // Day-level trajectories are drawn for every day so the stream does not
  // depend on which days have check-ins.
  std::vector<DayEnv> env = day_environment(days, env_rng);
  const Timestamp day0 = start_of_day(start);
  {
    std::poisson_distribution<int> weekday_events(4.0);
    std::poisson_distribution<int> weekend_events(1.0);
    std::uniform_real_distribution<double> duration(0.5, 2.0);
    DayEnv prev;
    for (int d = 0; d < days; ++d) {
      DayEnv& e = env[static_cast<std::size_t>(d)];
      const weekday wd{sys_days{floor<std::chrono::days>(day0)} + std::chrono::days{d}};
      const bool weekend = wd == Saturday || wd == Sunday;
      const int count = weekend ? weekend_events(env_rng) : weekday_events(env_rng);
      double busy = 0.0;
      for (int i = 0; i < count; ++i) busy += duration(env_rng);
      e.events = count;
      e.busy = std::min(busy, 24.0);
      e.steps = std::clamp(8000.0 + 0.7 * (prev.steps - 8000.0) + 1800.0 * unit(env_rng), 0.0, 40000.0);
      e.sleep = std::clamp(7.0 + 0.5 * (prev.sleep - 7.0) + 0.8 * unit(env_rng), 3.0, 12.0);
      e.resting_hr = std::clamp(62.0 + 0.8 * (prev.resting_hr - 62.0) + 2.0 * unit(env_rng), 40.0, 100.0);
      prev = e;
    }
  }

  const std::vector<Timestamp> times = schedule(spec.pattern, days, start, sched_rng);
  const double season_phase =
      2.0 * std::numbers::pi *
      static_cast<double>((sys_days{floor<std::chrono::days>(day0)} -
                           sys_days{year_month_day{floor<std::chrono::days>(day0)}.year() / 1 / 1})
                              .count()) /
      365.0;

  const auto missing_p = [&](SourceGroup g) {
    auto it = spec.missingness.find(g);
    return it == spec.missingness.end() ? 0.0 : it->second;
  };

  std::vector<CheckIn> out;
  out.reserve(times.size());
  for (const Timestamp at : times) {
    const auto d = static_cast<std::size_t>((start_of_day(at) - day0) / std::chrono::days{1});
    const DayEnv& e = env[d];
    const double hour = static_cast<double>((at - start_of_day(at)).count()) / 3600.0;

    std::map<std::string, FactorValue, std::less<>> values;
    const double temp = 12.0 + 9.0 * std::sin(season_phase + 2.0 * std::numbers::pi * static_cast<double>(d) / 365.0 - std::numbers::pi / 2.0) +
                        5.0 * std::sin(2.0 * std::numbers::pi * (hour - 9.0) / 24.0) + e.temp_anomaly +
                        1.5 * unit(env_rng);
    const double cloud = std::clamp(e.cloud + 10.0 * unit(env_rng), 0.0, 100.0);
    std::string condition = "clear";
    if (e.precipitation > 0.0) {
      condition = temp < 0.0 ? "snow" : (e.precipitation > 15.0 ? "storm" : "rain");
    } else if (cloud > 70.0) {
      condition = "cloudy";
    } else if (cloud > 55.0 && temp < 4.0) {
      condition = "fog";
    }
    values.emplace("temperature_c", std::round(temp * 10.0) / 10.0);
    values.emplace("precipitation_mm", std::round(e.precipitation * 10.0) / 10.0);
    values.emplace("cloud_cover_pct", std::round(cloud));
    values.emplace("condition", condition);
    values.emplace("event_count_day", e.events);
    values.emplace("busy_hours_day", std::round(e.busy * 100.0) / 100.0);
    values.emplace("steps_day", std::round(e.steps));
    values.emplace("sleep_hours", std::round(e.sleep * 100.0) / 100.0);
    values.emplace("resting_hr", std::round(e.resting_hr));

    EmotionPoint mood = spec.base_mood;
    for (const auto& [id, s] : spec.sensitivities) {
      auto it = values.find(id);
      if (it == values.end()) continue;
      double level = 0.0;
      if (const auto* number = std::get_if<double>(&it->second)) {
        const auto nominal = nominals().find(id);
        if (nominal == nominals().end()) continue;
        level = (*number - nominal->second.mean) / nominal->second.sd;
      } else {
        level = condition_level(std::get<std::string>(it->second));
      }
      if (spec.response == ResponseShape::banded) {
        level = level > 0.5 ? 1.0 : (level < -0.5 ? -1.0 : 0.0);
      }
      mood.attitude += s.attitude * level;
      mood.energy += s.energy * level;
    }
    const double na = unit(noise_rng);
    const double ne = unit(noise_rng);
    mood.attitude = std::clamp(mood.attitude + spec.noise_sd * na, kAxisMin, kAxisMax);
    mood.energy = std::clamp(mood.energy + spec.noise_sd * ne, kAxisMin, kAxisMax);

    std::map<SourceGroup, bool> dropped;
    for (SourceGroup g : kSourceGroups) dropped[g] = uniform(miss_rng) < missing_p(g);

    CheckIn c;
    c.user_id = spec.user_id;
    c.at = at;
    c.emotion = nearest_cell(mood);
    c.env.captured_at = at;
    for (auto& [id, value] : values) {
      const FactorDescriptor* d = registry.find(id);
      if (d == nullptr || dropped[d->group]) continue;
      c.env.values.emplace(id, std::move(value));
    }
    c.env = validate_snapshot(std::move(c.env), registry);
    out.push_back(std::move(c));
  }
  return out;
}

Dataset generate_dataset(const Scenario& scenario) {
  scenario.validate();
  Dataset dataset;
  for (const auto& spec : scenario.users) {
    if (dataset.count(spec.user_id)) {
      throw Error(Errc::InvalidArgument, "duplicate user '" + spec.user_id + "' in scenario");
    }
    dataset[spec.user_id] = generate_checkins(spec, scenario.days, scenario.start, scenario.registry);
  }
  return dataset;
}

std::vector<EvalReport> run_scenario(const Scenario& scenario, const std::vector<std::string>& models,
                                     const EngineConfig& config, const EvalOptions& options) {
  const Dataset dataset = generate_dataset(scenario);
  std::vector<EvalReport> reports;
  for (const auto& name : models) {
    const ModelFactory factory = make_model_factory(name, scenario.registry, config);
    reports.push_back(evaluate(dataset, factory, options, name));
  }
  return reports;
}

Scenario Scenario::from_json(const nlohmann::json& doc) {
  try {
    Scenario s;
    s.days = doc.value("days", 30);
    const std::uint64_t scenario_seed = doc.value("seed", std::uint64_t{1});
    if (doc.contains("start")) s.start = parse_rfc3339(doc.at("start").get<std::string>());
    if (doc.contains("registry")) s.registry = FactorRegistry::from_json(doc.at("registry"));

    std::uint64_t index = 0;
    for (const auto& u : doc.at("users")) {
      UserSpec spec;
      spec.user_id = u.value("user_id", "user-" + std::to_string(index + 1));
      spec.seed = u.contains("seed") ? u.at("seed").get<std::uint64_t>() : derive_seed(scenario_seed, index);
      spec.noise_sd = u.value("noise_sd", 0.0);
      if (u.contains("base_mood")) {
        const auto& m = u.at("base_mood");
        spec.base_mood = {m.at(0).get<double>(), m.at(1).get<double>()};
      }
      const std::string pattern = u.value("pattern", "consistent");
      if (pattern == "consistent") {
        spec.pattern = CheckinPattern::consistent;
      } else if (pattern == "inconsistent") {
        spec.pattern = CheckinPattern::inconsistent;
      } else {
        throw Error(Errc::ParseError, "pattern must be consistent or inconsistent");
      }
      const std::string response = u.value("response", "linear");
      if (response == "linear") {
        spec.response = ResponseShape::linear;
      } else if (response == "banded") {
        spec.response = ResponseShape::banded;
      } else {
        throw Error(Errc::ParseError, "response must be linear or banded");
      }
      if (u.contains("sensitivities")) {
        for (const auto& [id, axes] : u.at("sensitivities").items()) {
          spec.sensitivities[id] = {axes.value("attitude", 0.0), axes.value("energy", 0.0)};
        }
      }
      if (u.contains("missingness")) {
        const auto& m = u.at("missingness");
        if (m.is_string()) {
          const auto preset = m.get<std::string>();
          if (preset == "none") {
            spec.missingness = no_missingness();
          } else if (preset != "default") {
            throw Error(Errc::ParseError, "missingness preset must be 'default' or 'none'");
          }
        } else {
          for (const auto& [group, p] : m.items()) {
            spec.missingness[parse_source_group(group)] = p.get<double>();
          }
        }
      }
      s.users.push_back(std::move(spec));
      ++index;
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("scenario: ") + e.what());
  }
}

Scenario Scenario::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open scenario " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
  return from_json(doc);
}

}  // namespace mspsc
