#include <gtest/gtest.h>

#include <sstream>

#include "mspsc/error.hpp"
#include "mspsc/simulator.hpp"

using namespace mspsc;

namespace {

UserSpec temp_user(std::uint64_t seed, CheckinPattern pattern = CheckinPattern::consistent) {
  UserSpec u;
  u.user_id = "s" + std::to_string(seed);
  u.seed = seed;
  u.pattern = pattern;
  u.missingness = no_missingness();
  u.sensitivities["temperature_c"] = {20.0, 0.0};
  return u;
}

std::string dump(const std::vector<CheckIn>& rows) {
  Dataset d;
  d["x"] = rows;
  std::ostringstream out;
  write_dataset(out, d);
  return out.str();
}

const Timestamp kStart = parse_rfc3339("2024-03-04T00:00:00Z");

}  // namespace

TEST(Simulator, SameSeedSameBytes) {
  auto u = temp_user(5);
  u.noise_sd = 4.0;
  u.missingness = default_missingness();
  const auto reg = default_registry();
  EXPECT_EQ(dump(generate_checkins(u, 40, kStart, reg)), dump(generate_checkins(u, 40, kStart, reg)));
  auto v = u;
  v.seed = 6;
  EXPECT_NE(dump(generate_checkins(u, 40, kStart, reg)), dump(generate_checkins(v, 40, kStart, reg)));
}

TEST(Simulator, ForcedMissingness) {
  auto u = temp_user(2);
  u.missingness[SourceGroup::weather] = 1.0;
  const auto reg = default_registry();
  for (const auto& c : generate_checkins(u, 30, kStart, reg)) {
    for (const auto& [id, _] : c.env.values) EXPECT_NE(reg.at(id).group, SourceGroup::weather) << id;
  }
}

TEST(Simulator, NoiselessAttitudeMonotoneInTemperature) {
  const auto rows = generate_checkins(temp_user(3), 60, kStart, default_registry());
  std::vector<std::pair<double, int>> pairs;
  for (const auto& c : rows) {
    pairs.emplace_back(std::get<double>(c.env.values.at("temperature_c")), c.emotion.col());
    EXPECT_EQ(c.emotion.row(), 3);  // base energy 50 -> row 3 (tie goes low)
  }
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t i = 1; i < pairs.size(); ++i) EXPECT_LE(pairs[i - 1].second, pairs[i].second);
  EXPECT_GT(pairs.back().second, pairs.front().second);
}

TEST(Simulator, MissingnessRateConverges) {
  auto u = temp_user(9);
  u.missingness = default_missingness();
  const auto rows = generate_checkins(u, 600, kStart, default_registry());
  ASSERT_GE(rows.size(), 1000u);
  std::map<SourceGroup, std::size_t> dropped;
  for (const auto& c : rows) {
    if (!c.env.has("temperature_c")) ++dropped[SourceGroup::weather];
    if (!c.env.has("event_count_day")) ++dropped[SourceGroup::calendar];
    if (!c.env.has("steps_day")) ++dropped[SourceGroup::fitness];
  }
  for (const auto& [g, p] : default_missingness()) {
    EXPECT_NEAR(static_cast<double>(dropped[g]) / static_cast<double>(rows.size()), p, 0.03) << to_string(g);
  }
}

TEST(Simulator, PatternsMatchSegments) {
  const auto reg = default_registry();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    EXPECT_EQ(segment_user(generate_checkins(temp_user(seed), 30, kStart, reg)), UserSegment::consistent);
    EXPECT_EQ(segment_user(generate_checkins(temp_user(seed, CheckinPattern::inconsistent), 30, kStart, reg)),
              UserSegment::inconsistent);
  }
}

TEST(Simulator, ThirtyConsistentDaysGiveFiftyNineRows) {
  Scenario s;
  s.days = 30;
  s.users = {temp_user(4)};
  const auto reports = run_scenario(s, {"mspsc", "frequency"});
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].total_rows, 59u);
  EXPECT_EQ(reports[1].total_rows, 59u);
}

TEST(Simulator, ScenarioJson) {
  const auto doc = nlohmann::json::parse(R"({
    "days": 10, "seed": 3,
    "users": [
      {"user_id": "a", "pattern": "inconsistent", "missingness": {"weather": 0.5},
       "sensitivities": {"condition": {"attitude": 10}}, "response": "banded"},
      {"base_mood": [20, 80], "missingness": "none"}
    ]})");
  const auto s = Scenario::from_json(doc);
  ASSERT_EQ(s.users.size(), 2u);
  EXPECT_EQ(s.users[0].pattern, CheckinPattern::inconsistent);
  EXPECT_EQ(s.users[0].missingness.at(SourceGroup::weather), 0.5);
  EXPECT_EQ(s.users[1].user_id, "user-2");
  EXPECT_EQ(s.users[1].seed, derive_seed(3, 1));
  EXPECT_EQ(Scenario::from_json(doc).users[1].seed, s.users[1].seed);
  EXPECT_EQ(generate_dataset(s).size(), 2u);

  auto bad = doc;
  bad["users"][0]["sensitivities"] = {{"nope", {{"attitude", 1}}}};
  EXPECT_THROW(Scenario::from_json(bad), Error);
  bad = doc;
  bad["days"] = 0;
  EXPECT_THROW(Scenario::from_json(bad), Error);
}
