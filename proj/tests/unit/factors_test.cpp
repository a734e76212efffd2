#include <gtest/gtest.h>

#include <functional>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "mspsc/error.hpp"
#include "mspsc/wire.hpp"

using namespace mspsc;
using namespace mspsc::testing;

namespace {
Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::InvalidArgument;
}
}  // namespace

TEST(Registry, DefaultShipsNineFactorsInThreeGroups) {
  const auto reg = default_registry();
  EXPECT_EQ(reg.size(), 9u);
  std::set<SourceGroup> groups;
  for (const auto& d : reg.descriptors()) groups.insert(d.group);
  EXPECT_EQ(groups.size(), 3u);
  EXPECT_EQ(reg.at("condition").kind, FactorKind::categorical);
  EXPECT_EQ(reg.at("steps_day").group, SourceGroup::fitness);
  EXPECT_EQ(reg.at("event_count_day").group, SourceGroup::calendar);
  EXPECT_EQ(code_of([&] { reg.at("nope"); }), Errc::UnknownFactor);
}

TEST(Registry, JsonRoundTripAndValidation) {
  const auto reg = default_registry();
  EXPECT_EQ(FactorRegistry::from_json(reg.to_json()), reg);

  auto doc = reg.to_json();
  doc["factors"].push_back(doc["factors"][0]);
  EXPECT_EQ(code_of([&] { FactorRegistry::from_json(doc); }), Errc::InvalidArgument);

  EXPECT_THROW(FactorRegistry({{"x", FactorKind::numeric, "", std::pair{5.0, 5.0}, SourceGroup::weather, {}}}),
               Error);
}

TEST(Snapshot, ValidationRules) {
  const auto reg = default_registry();
  const auto ok = validate_snapshot(env({{"temperature_c", 21.5}}), reg);
  EXPECT_EQ(std::get<double>(ok.values.at("temperature_c")), 21.5);
  EXPECT_EQ(code_of([&] { validate_snapshot(env({{"temperature_c", 999.0}}), reg); }), Errc::OutOfRange);
  EXPECT_EQ(code_of([&] { validate_snapshot(env({{"unknown_factor", 1.0}}), reg); }), Errc::UnknownFactor);
  EXPECT_EQ(code_of([&] { validate_snapshot(env({{"temperature_c", std::string("hot")}}), reg); }),
            Errc::KindMismatch);
  EXPECT_EQ(code_of([&] { validate_snapshot(env({{"condition", 1.0}}), reg); }), Errc::KindMismatch);
  EXPECT_EQ(code_of([&] { validate_snapshot(env({{"condition", std::string("hail")}}), reg); }),
            Errc::OutOfRange);
  EXPECT_TRUE(validate_snapshot(env({}), reg).values.empty());
}

TEST(Snapshot, ClampPolicy) {
  auto doc = default_registry().to_json();
  doc["range_policy"] = "clamp";
  const auto reg = FactorRegistry::from_json(doc);
  const auto s = validate_snapshot(env({{"temperature_c", 999.0}, {"sleep_hours", -3.0}}), reg);
  EXPECT_EQ(std::get<double>(s.values.at("temperature_c")), 50.0);
  EXPECT_EQ(std::get<double>(s.values.at("sleep_hours")), 0.0);
}

TEST(Wire, SnapshotRoundTripKeepsAbsence) {
  const auto s = env({{"temperature_c", 3.25}, {"condition", std::string("fog")}}, ts("2024-05-01T08:00:00Z"));
  const auto back = snapshot_from_json(nlohmann::json::parse(snapshot_to_json(s).dump()));
  EXPECT_EQ(back, s);
  EXPECT_FALSE(back.has("precipitation_mm"));

  const auto nulls = snapshot_from_json(
      {{"captured_at", "2024-05-01T08:00:00Z"}, {"values", {{"temperature_c", nullptr}}}});
  EXPECT_TRUE(nulls.values.empty());
}

TEST(Wire, CheckInRoundTrip) {
  const auto c = checkin("u1", ts("2024-05-01T08:00:00Z"), 42, env({{"steps_day", 1234.0}}));
  const auto doc = checkin_to_json(c);
  EXPECT_EQ(doc.at("emotion"), 42);
  EXPECT_EQ(doc.at("at"), "2024-05-01T08:00:00Z");
  EXPECT_EQ(checkin_from_json(doc), c);
  auto bad = doc;
  bad["emotion"] = 64;
  EXPECT_THROW(checkin_from_json(bad), Error);
}

TEST(Wire, DatasetOrderingEnforced) {
  Dataset d;
  d["a"] = temp_fixture("a");
  d["b"] = temp_fixture("b");
  std::stringstream buf;
  write_dataset(buf, d);
  EXPECT_EQ(read_dataset(buf), d);

  std::stringstream bad;
  bad << checkin_to_json(d["a"][1]).dump() << "\n" << checkin_to_json(d["a"][0]).dump() << "\n";
  EXPECT_EQ(code_of([&] { read_dataset(bad); }), Errc::OutOfOrderCheckIn);
}

TEST(Registry, ShippedFileMatchesBuiltIn) {
  EXPECT_EQ(FactorRegistry::load(std::string(MSPSC_CONFIG_DIR) + "/registry.json"), default_registry());
}
