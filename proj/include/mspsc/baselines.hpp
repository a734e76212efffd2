#pragma once

#include <span>

#include "mspsc/predictor.hpp"

namespace mspsc {

// Single candidate: the modal historical emotion. Throws Error{InsufficientData}.
Prediction baseline_frequency(std::span<const CheckIn> history);

// Majority cell among the k nearest check-ins. Distance is Euclidean over the
// numeric factors seen in the history, each rescaled by its historical
// min..max range; missing values (in history or query) take the historical
// mean. Ties in the vote go to the emotion of the nearest neighbor.
// Throws Error{InsufficientData}.
Prediction baseline_knn(std::span<const CheckIn> history, const EnvSnapshot& snapshot,
                        const FactorRegistry& registry, std::size_t k);

struct LinearFit {
  EmotionPoint point;  // unclamped fitted coordinates
  std::vector<std::string> factors;  // regressors, registry order
  std::size_t rows = 0;              // training rows used
};

// Per-axis least squares on the numeric factors present in `snapshot`, using
// the history rows that carry all of them. Rank-deficient systems get the
// minimum-norm solution. Throws Error{InsufficientData} below two rows.
LinearFit fit_linear(std::span<const CheckIn> history, const EnvSnapshot& snapshot,
                     const FactorRegistry& registry);

// nearest_cell of the fitted point (clamped onto the grid).
Prediction baseline_linreg(std::span<const CheckIn> history, const EnvSnapshot& snapshot,
                           const FactorRegistry& registry);

}  // namespace mspsc
