#include "mspsc/personalization.hpp"

#include <algorithm>
#include <map>

#include "mspsc/error.hpp"

namespace mspsc {

Cluster build_cluster(const SimilarityTable& table, std::string_view factor_id, std::size_t k) {
  const FactorColumn* column = table.find(factor_id);
  if (column == nullptr || !column->active) {
    throw Error(Errc::InactiveFactor, std::string(factor_id));
  }
  Cluster cluster;
  cluster.factor_id = std::string(factor_id);
  for (std::size_t t = 0; t < column->weights.size(); ++t) {
    if (column->weights[t] > 0.0) cluster.members.push_back({t, column->weights[t]});
  }
  const auto by_weight_then_recency = [](const ClusterMember& a, const ClusterMember& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.position > b.position;
  };
  const std::size_t keep = std::min(k, cluster.members.size());
  std::partial_sort(cluster.members.begin(), cluster.members.begin() + static_cast<std::ptrdiff_t>(keep),
                    cluster.members.end(), by_weight_then_recency);
  cluster.members.resize(keep);
  return cluster;
}

GridIndex cluster_vote(const Cluster& cluster, std::span<const CheckIn> history) {
  if (cluster.members.empty()) throw Error(Errc::EmptyCluster, cluster.factor_id);

  struct Tally {
    std::size_t count = 0;
    double weight = 0.0;
    std::size_t latest = 0;
  };
  std::map<GridIndex, Tally> tallies;
  for (const auto& m : cluster.members) {
    if (m.position >= history.size()) {
      throw Error(Errc::OutOfRange, "cluster member outside history");
    }
    Tally& tally = tallies[history[m.position].emotion];
    ++tally.count;
    tally.weight += m.weight;
    tally.latest = std::max(tally.latest, m.position);
  }
  auto best = tallies.begin();
  for (auto it = std::next(tallies.begin()); it != tallies.end(); ++it) {
    const Tally& a = it->second;
    const Tally& b = best->second;
    if (a.count != b.count ? a.count > b.count
        : a.weight != b.weight ? a.weight > b.weight
                               : a.latest > b.latest) {
      best = it;
    }
  }
  return best->first;
}

std::int64_t update_weight(std::int64_t w, GridIndex predicted, GridIndex actual, double eps,
                           std::int64_t floor) noexcept {
  return cells_within_tolerance(predicted, actual, eps) ? w + 1 : floor;
}

FeedbackResult process_feedback(UserProfile& profile, const CheckIn& checkin,
                                const FactorRegistry& registry, const EngineConfig& config) {
  if (checkin.user_id != profile.user_id) {
    throw Error(Errc::InvalidArgument,
                "check-in for '" + checkin.user_id + "' applied to '" + profile.user_id + "'");
  }
  if (!profile.history.empty() && !(profile.history.back().at < checkin.at)) {
    throw Error(Errc::OutOfOrderCheckIn, "check-in at " + format_rfc3339(checkin.at) +
                                             " is not after " +
                                             format_rfc3339(profile.history.back().at));
  }
  CheckIn validated = checkin;
  validated.env = validate_snapshot(checkin.env, registry);

  FeedbackResult result;
  PersonalWeights weights = profile.weights;
  if (!profile.history.empty()) {
    const SimilarityTable table = retrieve(profile.history, validated.env, registry);
    for (const auto& column : table.columns()) {
      if (!column.active) continue;
      const Cluster cluster = build_cluster(table, column.factor_id, config.k);
      const GridIndex voted = cluster_vote(cluster, profile.history);
      const std::int64_t before = weights.value(column.factor_id);
      const std::int64_t after =
          update_weight(before, voted, validated.emotion, config.eps, config.reset_floor);
      weights.weights.insert_or_assign(column.factor_id, after);
      const bool hit = cells_within_tolerance(voted, validated.emotion, config.eps);
      result.votes.push_back({column.factor_id, voted, hit, before, after});
    }
    if (!result.votes.empty()) ++weights.feedback_rounds;
  }

  profile.history.push_back(std::move(validated));
  profile.weights = std::move(weights);
  return result;
}

}  // namespace mspsc
