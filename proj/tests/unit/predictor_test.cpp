#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "mspsc/error.hpp"
#include "mspsc/personalization.hpp"
#include "mspsc/predictor.hpp"
#include "oracle.hpp"

using namespace mspsc;
using namespace mspsc::testing;

namespace {
std::vector<int> cells(const Prediction& p) {
  std::vector<int> out;
  for (const auto& c : p.candidates) out.push_back(c.cell.ordinal());
  return out;
}
}  // namespace

TEST(Scores, FixtureHandSum) {
  const auto history = temp_fixture();
  const auto table = retrieve(history, env({{"temperature_c", 15.0}}), default_registry());
  const auto scores = score_emotions(table, history, FactorWeights{});
  ASSERT_EQ(scores.size(), 2u);
  EXPECT_NEAR(scores.at(GridIndex::from_ordinal(5)), 0.4545454, 1e-6);
  EXPECT_NEAR(scores.at(GridIndex::from_ordinal(9)), 0.5454545, 1e-6);
}

TEST(Scores, SingleEmotionHistory) {
  const std::vector<CheckIn> h{checkin("u", hour(0), 5, env({{"temperature_c", 3.0}}))};
  const auto scores = score_emotions(retrieve(h, env({{"temperature_c", 30.0}}), default_registry()), h,
                                     FactorWeights{});
  ASSERT_EQ(scores.size(), 1u);
  EXPECT_GT(scores.begin()->second, 0.0);
}

TEST(Scores, ZeroWeightsFallBack) {
  const auto history = temp_fixture();
  const auto table = retrieve(history, env({{"temperature_c", 15.0}}), default_registry());
  EXPECT_TRUE(score_emotions(table, history, FactorWeights{{"temperature_c", 0.0}}).empty());
  auto p = select_candidates({}, 0.8, 5, history);
  EXPECT_TRUE(p.fallback);
  EXPECT_EQ(cells(p), std::vector<int>{9});
  EXPECT_GT(p.candidates[0].score, 0.0);
}

TEST(Select, ThresholdAndOrder) {
  const auto history = temp_fixture();
  const EmotionScores s{{GridIndex::from_ordinal(5), 0.4545}, {GridIndex::from_ordinal(9), 0.5454}};
  EXPECT_EQ(cells(select_candidates(s, 0.8, 5, history)), (std::vector<int>{9, 5}));
  const EmotionScores s2{{GridIndex::from_ordinal(5), 0.1}, {GridIndex::from_ordinal(9), 0.9}};
  EXPECT_EQ(cells(select_candidates(s2, 0.8, 5, history)), (std::vector<int>{9}));
  EXPECT_EQ(cells(select_candidates(s, 0.8, 1, history)), (std::vector<int>{9}));
  // Equal scores: the emotion reported more recently goes first.
  const EmotionScores tie{{GridIndex::from_ordinal(5), 0.5}, {GridIndex::from_ordinal(9), 0.5}};
  EXPECT_EQ(cells(select_candidates(tie, 0.8, 5, history)), (std::vector<int>{9, 5}));
}

TEST(Select, FallbackToModalAndEmptyHistory) {
  std::vector<CheckIn> h;
  for (int t = 0; t < 5; ++t) h.push_back(checkin("u", hour(t), t < 3 ? 12 : 40, env({})));
  const auto p = select_candidates({}, 0.8, 5, h);
  EXPECT_EQ(cells(p), std::vector<int>{12});
  EXPECT_EQ(p.candidates[0].score, kFallbackScore);
  try {
    select_candidates({}, 0.8, 5, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoHistoryFallbackImpossible);
  }
}

TEST(Predict, EndToEndFixture) {
  const auto reg = default_registry();
  EngineConfig config;
  UserProfile profile = make_profile("u", reg, config);
  profile.history = temp_fixture();
  const auto p = predict(profile, env({{"temperature_c", 15.0}}, hour(5)), reg, config);
  EXPECT_EQ(p.top().ordinal(), 9);
  EXPECT_EQ(cells(p), (std::vector<int>{9, 5}));
  EXPECT_EQ(p.factors_used, std::vector<std::string>{"temperature_c"});
  EXPECT_FALSE(p.fallback);
  EXPECT_EQ(p, predict(profile, env({{"temperature_c", 15.0}}, hour(5)), reg, config));

  const auto none = predict(profile, env({{"sleep_hours", 6.0}}), reg, config);
  EXPECT_TRUE(none.fallback);
  EXPECT_EQ(cells(none), std::vector<int>{9});

  UserProfile empty = make_profile("v", reg, config);
  EXPECT_THROW(predict(empty, env({}), reg, config), Error);
}

TEST(Predict, JsonShape) {
  const auto reg = default_registry();
  EngineConfig config;
  UserProfile profile = make_profile("u", reg, config);
  profile.history = temp_fixture();
  const auto doc = predict(profile, env({{"temperature_c", 15.0}}, hour(5)), reg, config).to_json();
  EXPECT_EQ(doc.at("candidates")[0].at("cell"), 9);
  EXPECT_EQ(doc.at("candidates")[0].at("rank"), 1);
  EXPECT_EQ(doc.at("fallback"), false);
  EXPECT_EQ(doc.at("generated_at"), format_rfc3339(hour(5)));
}

TEST(Predict, MatchesOracleOnRandomInstances) {
  const auto reg = small_registry();
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> w(0.0, 5.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = random_instance(rng, 10);
    const std::map<std::string, double> weights{{"a", w(rng)}, {"b", w(rng)}, {"c", w(rng)}};
    const FactorWeights fw(weights.begin(), weights.end());
    const auto got = score_emotions(retrieve(inst.history, inst.snapshot, reg), inst.history, fw);
    const auto want = oracle_scores(inst.history, inst.snapshot, weights);
    ASSERT_EQ(got.size(), want.size());
    for (const auto& [cell, s] : got) EXPECT_NEAR(s, want.at(cell.ordinal()), 1e-12);
  }
}

TEST(Predict, CandidateInvariants) {
  const auto reg = small_registry();
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<std::size_t> nmax(1, 6);
  std::uniform_real_distribution<double> theta(0.05, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = random_instance(rng, 30, 6);
    EngineConfig config;
    config.n_max = nmax(rng);
    config.theta = theta(rng);
    UserProfile profile = make_profile("r", reg, config);
    profile.history = inst.history;
    const auto p = predict(profile, inst.snapshot, reg, config);
    ASSERT_GE(p.candidates.size(), 1u);
    EXPECT_LE(p.candidates.size(), config.n_max);
    std::set<int> distinct;
    for (std::size_t i = 0; i < p.candidates.size(); ++i) {
      EXPECT_GT(p.candidates[i].score, 0.0);
      // Scores within the relative tie tolerance may appear in recency order.
      if (i > 0) EXPECT_LE(p.candidates[i].score, p.candidates[i - 1].score * (1.0 + 1e-9));
      distinct.insert(p.candidates[i].cell.ordinal());
    }
    EXPECT_EQ(distinct.size(), p.candidates.size());
  }
}

TEST(Predict, FreshUserEqualsUnweightedVote) {
  const auto reg = small_registry();
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_instance(rng, 15);
    EngineConfig config;
    UserProfile profile = make_profile("r", reg, config);
    profile.history = inst.history;
    const auto table = retrieve(inst.history, inst.snapshot, reg);
    const auto plain = select_candidates(score_emotions(table, inst.history, FactorWeights{}), config.theta,
                                         config.n_max, inst.history);
    const auto p = predict(profile, inst.snapshot, reg, config);
    EXPECT_EQ(cells(p), cells(plain));
  }
}
