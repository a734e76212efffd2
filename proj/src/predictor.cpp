#include "mspsc/predictor.hpp"

#include <algorithm>

#include "mspsc/error.hpp"
#include "mspsc/kernels.hpp"

namespace mspsc {
namespace {

std::map<GridIndex, std::size_t> last_occurrence(std::span<const CheckIn> history) {
  std::map<GridIndex, std::size_t> last;
  for (std::size_t t = 0; t < history.size(); ++t) last[history[t].emotion] = t;
  return last;
}

}  // namespace

nlohmann::json Prediction::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t rank = 0; rank < candidates.size(); ++rank) {
    const auto& c = candidates[rank];
    const EmotionPoint center = grid_center(c.cell);
    list.push_back({{"rank", rank + 1},
                    {"cell", c.cell.ordinal()},
                    {"col", c.cell.col()},
                    {"row", c.cell.row()},
                    {"attitude", center.attitude},
                    {"energy", center.energy},
                    {"score", c.score}});
  }
  return {{"candidates", std::move(list)},
          {"generated_at", format_rfc3339(generated_at)},
          {"factors_used", factors_used},
          {"fallback", fallback}};
}

EmotionScores score_emotions(const SimilarityTable& table, std::span<const CheckIn> history,
                             const FactorWeights& weights, double default_weight) {
  if (history.empty()) throw Error(Errc::EmptyHistory, "cannot score without history");
  if (table.history_size() != history.size()) {
    throw Error(Errc::InvalidArgument, "similarity table built for a different history");
  }
  std::vector<double> per_position(history.size(), 0.0);
  for (const auto& column : table.columns()) {
    if (!column.active) continue;
    auto it = weights.find(column.factor_id);
    const double w = it == weights.end() ? default_weight : it->second;
    if (!(w > 0.0)) continue;
    kernels::axpy(w, column.weights, per_position);
  }
  EmotionScores scores;
  for (std::size_t t = 0; t < history.size(); ++t) {
    if (per_position[t] > 0.0) scores[history[t].emotion] += per_position[t];
  }
  return scores;
}

EmotionScores score_emotions(const SimilarityTable& table, std::span<const CheckIn> history,
                             const PersonalWeights& weights) {
  FactorWeights w;
  for (const auto& column : table.columns()) {
    w.emplace(column.factor_id, static_cast<double>(weights.value(column.factor_id)));
  }
  return score_emotions(table, history, w);
}

GridIndex modal_emotion(std::span<const CheckIn> history) {
  if (history.empty()) throw Error(Errc::EmptyHistory, "no history for a modal emotion");
  std::map<GridIndex, std::size_t> counts;
  for (const auto& c : history) ++counts[c.emotion];
  const auto last = last_occurrence(history);
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second ||
        (it->second == best->second && last.at(it->first) > last.at(best->first))) {
      best = it;
    }
  }
  return best->first;
}

Prediction select_candidates(const EmotionScores& scores, double theta, std::size_t n_max,
                             std::span<const CheckIn> history) {
  if (!(theta > 0.0 && theta <= 1.0)) throw Error(Errc::InvalidArgument, "theta must be in (0,1]");
  if (n_max == 0) throw Error(Errc::InvalidArgument, "n_max must be positive");

  double best = 0.0;
  for (const auto& [cell, score] : scores) best = std::max(best, score);

  Prediction out;
  if (!(best > 0.0)) {
    if (history.empty()) {
      throw Error(Errc::NoHistoryFallbackImpossible, "no scores and no history");
    }
    out.candidates.push_back({modal_emotion(history), kFallbackScore});
    out.fallback = true;
    return out;
  }

  const auto last = last_occurrence(history);
  const auto recency = [&](GridIndex cell) -> long long {
    auto it = last.find(cell);
    return it == last.end() ? -1 : static_cast<long long>(it->second);
  };

  const double slack = kScoreTieTolerance * best;
  std::vector<Candidate> kept;
  for (const auto& [cell, score] : scores) {
    if (score >= theta * best - slack) kept.push_back({cell, score});
  }
  std::sort(kept.begin(), kept.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return recency(a.cell) > recency(b.cell);
  });
  // Near-equal runs are ordered purely by recency.
  for (std::size_t i = 0; i < kept.size();) {
    std::size_t j = i + 1;
    while (j < kept.size() && kept[i].score - kept[j].score <= slack) ++j;
    std::stable_sort(kept.begin() + static_cast<std::ptrdiff_t>(i),
                     kept.begin() + static_cast<std::ptrdiff_t>(j),
                     [&](const Candidate& a, const Candidate& b) {
                       return recency(a.cell) > recency(b.cell);
                     });
    i = j;
  }
  if (kept.size() > n_max) kept.resize(n_max);
  out.candidates = std::move(kept);
  return out;
}

Prediction predict(const UserProfile& profile, const EnvSnapshot& snapshot,
                   const FactorRegistry& registry, const EngineConfig& config) {
  if (profile.history.empty()) {
    throw Error(Errc::NoHistoryFallbackImpossible, "user '" + profile.user_id + "' has no check-ins");
  }
  const EnvSnapshot validated = validate_snapshot(snapshot, registry);
  const SimilarityTable table = retrieve(profile.history, validated, registry);
  const EmotionScores scores = score_emotions(table, profile.history, profile.weights);
  Prediction out = select_candidates(scores, config.theta, config.n_max, profile.history);
  out.generated_at = validated.captured_at;
  if (!out.fallback) {
    for (const auto& id : table.active_factors()) {
      if (profile.weights.value(id) > 0) out.factors_used.push_back(id);
    }
  }
  return out;
}

}  // namespace mspsc
