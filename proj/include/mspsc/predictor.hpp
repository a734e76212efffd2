#pragma once

#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mspsc/profile.hpp"
#include "mspsc/similarity.hpp"

namespace mspsc {

// Score assigned to the single modal-emotion candidate when no factor could
// score anything; positive so the candidate invariants hold, tiny so it can
// never be mistaken for a real score.
inline constexpr double kFallbackScore = std::numeric_limits<double>::min();

// Scores closer than this (relative to the best score) are treated as tied,
// so rounding noise cannot reorder candidates.
inline constexpr double kScoreTieTolerance = 1e-9;

struct Candidate {
  GridIndex cell;
  double score = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct Prediction {
  std::vector<Candidate> candidates;  // best first, scores non-increasing
  Timestamp generated_at{};
  std::vector<std::string> factors_used;
  bool fallback = false;  // modal-emotion fallback, no factor contributed

  GridIndex top() const { return candidates.front().cell; }
  nlohmann::json to_json() const;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

using EmotionScores = std::map<GridIndex, double>;
using FactorWeights = std::map<std::string, double, std::less<>>;

// score(e) = sum over active factors i and positions t of w_i * z_{i,t} * [e_t == e].
// Only emotions with a positive score appear. Factors missing from `weights`
// use `default_weight`. Throws Error{EmptyHistory}, Error{InvalidArgument}.
EmotionScores score_emotions(const SimilarityTable& table, std::span<const CheckIn> history,
                             const FactorWeights& weights, double default_weight = 1.0);
EmotionScores score_emotions(const SimilarityTable& table, std::span<const CheckIn> history,
                             const PersonalWeights& weights);

// Keeps emotions scoring at least theta * best, best first (ties: emotion
// reported more recently first), at most n_max. With nothing to keep it falls
// back to the user's modal emotion. Throws Error{NoHistoryFallbackImpossible}
// when that fallback has no history either.
Prediction select_candidates(const EmotionScores& scores, double theta, std::size_t n_max,
                             std::span<const CheckIn> history);

// The modal emotion of a history; ties go to the most recently reported.
// Throws Error{EmptyHistory}.
GridIndex modal_emotion(std::span<const CheckIn> history);

// retrieve -> score_emotions -> select_candidates. generated_at is the
// snapshot's capture time, so identical inputs give identical output.
// Throws Error{NoHistoryFallbackImpossible} on an empty history.
Prediction predict(const UserProfile& profile, const EnvSnapshot& snapshot,
                   const FactorRegistry& registry, const EngineConfig& config);

}  // namespace mspsc
