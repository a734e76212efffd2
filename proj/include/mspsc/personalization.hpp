#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mspsc/profile.hpp"
#include "mspsc/similarity.hpp"

namespace mspsc {

struct ClusterMember {
  std::size_t position = 0;  // index into the history
  double weight = 0.0;

  friend bool operator==(const ClusterMember&, const ClusterMember&) = default;
};

// Top-k history positions for one factor, highest similarity first.
struct Cluster {
  std::string factor_id;
  std::vector<ClusterMember> members;
};

// Positions with zero weight never join. Equal weights put the more recent
// check-in first. Throws Error{InactiveFactor} if the factor is absent from
// the table or inactive.
Cluster build_cluster(const SimilarityTable& table, std::string_view factor_id, std::size_t k);

// Most frequent emotion among members; ties go to the larger summed weight,
// then to the emotion seen most recently. Throws Error{EmptyCluster}.
GridIndex cluster_vote(const Cluster& cluster, std::span<const CheckIn> history);

// w + 1 when the cell centers agree within eps on both axes, else `floor`.
std::int64_t update_weight(std::int64_t w, GridIndex predicted, GridIndex actual, double eps,
                           std::int64_t floor = 0) noexcept;

struct FactorVote {
  std::string factor_id;
  GridIndex voted;
  bool hit = false;
  std::int64_t weight_before = 0;
  std::int64_t weight_after = 0;
};

struct FeedbackResult {
  std::vector<FactorVote> votes;  // one per evaluated factor
};

// Predict-then-reveal: every factor both present in the new check-in and
// active over the existing history gets a cluster vote scored against the
// reported emotion, then the check-in is appended. Strong guarantee: on
// error the profile is untouched.
// Throws Error{OutOfOrderCheckIn}, Error{InvalidArgument} (user mismatch), and
// snapshot validation errors.
FeedbackResult process_feedback(UserProfile& profile, const CheckIn& checkin,
                                const FactorRegistry& registry, const EngineConfig& config);

}  // namespace mspsc
