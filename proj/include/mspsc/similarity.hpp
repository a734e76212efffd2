#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mspsc/factors.hpp"

namespace mspsc {

// Added to every absolute difference so that an exact match stays finite
// (and dominant) instead of dividing by zero.
inline constexpr double kDivisionEpsilon = 1e-6;

// Un-normalized closeness of one historical value to the current value.
// hist == nullptr (factor missing at that check-in) yields exactly 0.
// Categorical values use distance 0 on equality and 1 otherwise.
// Throws Error{KindMismatch} when a value's type disagrees with `kind`.
double raw_similarity(const FactorValue* hist, const FactorValue& current, FactorKind kind);

struct NormalizedFactor {
  std::vector<double> weights;
  bool active = false;  // false when every raw value was 0
};

// Divides by the partition sum so the weights sum to 1; an all-zero input
// stays all-zero and is reported inactive.
NormalizedFactor normalize_factor(std::span<const double> raw);

// Similarity weights of one factor against every history position.
struct FactorColumn {
  std::string factor_id;
  FactorKind kind = FactorKind::numeric;
  std::vector<double> weights;  // one per history position
  bool active = false;

  friend bool operator==(const FactorColumn&, const FactorColumn&) = default;
};

class SimilarityTable {
 public:
  SimilarityTable() = default;
  SimilarityTable(std::size_t history_size, std::vector<FactorColumn> columns)
      : history_size_(history_size), columns_(std::move(columns)) {}

  std::size_t history_size() const noexcept { return history_size_; }
  const std::vector<FactorColumn>& columns() const noexcept { return columns_; }
  bool empty() const noexcept { return columns_.empty(); }

  const FactorColumn* find(std::string_view factor_id) const noexcept;
  // 0 for factors not in the table.
  double weight(std::string_view factor_id, std::size_t position) const;
  std::vector<std::string> active_factors() const;

 private:
  std::size_t history_size_ = 0;
  std::vector<FactorColumn> columns_;  // registry order
};

// One column per factor present in `snapshot` (registry order). Factors the
// snapshot lacks are left out entirely. Throws Error{EmptyHistory}.
SimilarityTable retrieve(std::span<const CheckIn> history, const EnvSnapshot& snapshot,
                         const FactorRegistry& registry);

}  // namespace mspsc
