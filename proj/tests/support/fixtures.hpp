#pragma once

#include <initializer_list>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mspsc/factors.hpp"
#include "mspsc/profile.hpp"
#include "mspsc/time.hpp"

namespace mspsc::testing {

inline Timestamp ts(const char* text) { return parse_rfc3339(text); }

inline EnvSnapshot env(std::initializer_list<std::pair<const char*, FactorValue>> values,
                       Timestamp at = {}) {
  EnvSnapshot s;
  s.captured_at = at;
  for (const auto& [id, v] : values) s.values.emplace(id, v);
  return s;
}

inline CheckIn checkin(const std::string& user, Timestamp at, int emotion, EnvSnapshot e) {
  e.captured_at = at;
  return CheckIn{user, at, GridIndex::from_ordinal(emotion), std::move(e)};
}

// Check-ins one hour apart starting at 2024-01-01T00:00Z.
inline Timestamp hour(int h) { return ts("2024-01-01T00:00:00Z") + std::chrono::hours{h}; }

// The three-check-in temperature fixture: emotions [5, 9, 9] at 10, 20, 40 C.
inline std::vector<CheckIn> temp_fixture(const std::string& user = "u") {
  return {checkin(user, hour(0), 5, env({{"temperature_c", 10.0}})),
          checkin(user, hour(1), 9, env({{"temperature_c", 20.0}})),
          checkin(user, hour(2), 9, env({{"temperature_c", 40.0}}))};
}

inline FactorRegistry small_registry() {
  return FactorRegistry({
      {"a", FactorKind::numeric, "u", std::pair{0.0, 100.0}, SourceGroup::weather, {}},
      {"b", FactorKind::numeric, "u", std::pair{0.0, 100.0}, SourceGroup::calendar, {}},
      {"c", FactorKind::categorical, "", std::nullopt, SourceGroup::fitness, {"x", "y", "z"}},
  });
}

// Random history over small_registry(): up to `max_rows` rows, each factor
// present with probability 0.7, values drawn from a few levels so exact
// matches and ties happen.
struct RandomInstance {
  std::vector<CheckIn> history;
  EnvSnapshot snapshot;
};

inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t max_rows, int emotions = 64) {
  std::uniform_int_distribution<std::size_t> rows(1, max_rows);
  std::uniform_int_distribution<int> emotion(0, emotions - 1);
  std::uniform_int_distribution<int> level(0, 8);
  std::uniform_int_distribution<int> cat(0, 2);
  std::bernoulli_distribution present(0.7);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  const char* cats[] = {"x", "y", "z"};
  const auto draw = [&](Timestamp at) {
    EnvSnapshot s;
    s.captured_at = at;
    if (present(rng)) s.values.emplace("a", std::min(100.0, level(rng) * 12.5 + (jitter(rng) < 0.5 ? 0.0 : jitter(rng))));
    if (present(rng)) s.values.emplace("b", static_cast<double>(level(rng)));
    if (present(rng)) s.values.emplace("c", std::string(cats[cat(rng)]));
    return s;
  };
  RandomInstance out;
  const std::size_t n = rows(rng);
  for (std::size_t t = 0; t < n; ++t) {
    const Timestamp at = hour(static_cast<int>(t));
    out.history.push_back(CheckIn{"r", at, GridIndex::from_ordinal(emotion(rng)), draw(at)});
  }
  out.snapshot = draw(hour(static_cast<int>(n)));
  return out;
}

}  // namespace mspsc::testing
