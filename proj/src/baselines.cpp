#include "mspsc/baselines.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "mspsc/error.hpp"
#include "mspsc/kernels.hpp"

namespace mspsc {
namespace {

const double* numeric_value(const EnvSnapshot& env, std::string_view id) {
  const FactorValue* v = env.get(id);
  return v != nullptr ? std::get_if<double>(v) : nullptr;
}

Prediction single(GridIndex cell, Timestamp at) {
  Prediction p;
  p.candidates.push_back({cell, 1.0});
  p.generated_at = at;
  return p;
}

}  // namespace

Prediction baseline_frequency(std::span<const CheckIn> history) {
  if (history.empty()) throw Error(Errc::InsufficientData, "frequency baseline needs history");
  return single(modal_emotion(history), Timestamp{});
}

Prediction baseline_knn(std::span<const CheckIn> history, const EnvSnapshot& snapshot,
                        const FactorRegistry& registry, std::size_t k) {
  if (history.empty()) throw Error(Errc::InsufficientData, "knn baseline needs history");
  if (k == 0) throw Error(Errc::InvalidArgument, "k must be positive");

  struct Feature {
    std::string id;
    double mean = 0.0;
    double lo = 0.0;
    double span = 1.0;
  };
  std::vector<Feature> features;
  for (const auto& d : registry.descriptors()) {
    if (d.kind != FactorKind::numeric) continue;
    double total = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    for (const auto& c : history) {
      if (const double* v = numeric_value(c.env, d.id)) {
        lo = count == 0 ? *v : std::min(lo, *v);
        hi = count == 0 ? *v : std::max(hi, *v);
        total += *v;
        ++count;
      }
    }
    if (count == 0) continue;
    features.push_back({d.id, total / static_cast<double>(count), lo, hi > lo ? hi - lo : 1.0});
  }

  const std::size_t dim = features.size();
  const auto encode = [&](const EnvSnapshot& env, double* out) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double* v = numeric_value(env, features[j].id);
      out[j] = ((v != nullptr ? *v : features[j].mean) - features[j].lo) / features[j].span;
    }
  };
  std::vector<double> query(dim);
  encode(snapshot, query.data());
  std::vector<double> row(dim);

  struct Neighbor {
    std::size_t position;
    double distance;
  };
  std::vector<Neighbor> neighbors;
  neighbors.reserve(history.size());
  for (std::size_t t = 0; t < history.size(); ++t) {
    encode(history[t].env, row.data());
    neighbors.push_back({t, kernels::squared_distance(query, row)});
  }
  const std::size_t keep = std::min(k, neighbors.size());
  std::partial_sort(neighbors.begin(), neighbors.begin() + static_cast<std::ptrdiff_t>(keep),
                    neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
                      if (a.distance != b.distance) return a.distance < b.distance;
                      return a.position > b.position;
                    });

  std::map<GridIndex, std::size_t> votes;
  for (std::size_t i = 0; i < keep; ++i) ++votes[history[neighbors[i].position].emotion];
  std::size_t best_count = 0;
  for (const auto& [cell, count] : votes) best_count = std::max(best_count, count);
  for (std::size_t i = 0; i < keep; ++i) {
    const GridIndex cell = history[neighbors[i].position].emotion;
    if (votes[cell] == best_count) return single(cell, snapshot.captured_at);
  }
  return single(history.back().emotion, snapshot.captured_at);  // unreachable
}

LinearFit fit_linear(std::span<const CheckIn> history, const EnvSnapshot& snapshot,
                     const FactorRegistry& registry) {
  LinearFit fit;
  for (const auto& d : registry.descriptors()) {
    if (d.kind == FactorKind::numeric && numeric_value(snapshot, d.id) != nullptr) {
      fit.factors.push_back(d.id);
    }
  }
  std::vector<std::size_t> usable;
  for (std::size_t t = 0; t < history.size(); ++t) {
    const bool complete = std::all_of(fit.factors.begin(), fit.factors.end(), [&](const auto& id) {
      return numeric_value(history[t].env, id) != nullptr;
    });
    if (complete) usable.push_back(t);
  }
  if (usable.size() < 2) {
    throw Error(Errc::InsufficientData, "linear regression needs at least two complete rows");
  }

  const auto n = static_cast<Eigen::Index>(usable.size());
  const auto p = static_cast<Eigen::Index>(fit.factors.size()) + 1;
  Eigen::MatrixXd design(n, p);
  Eigen::MatrixXd targets(n, 2);
  for (Eigen::Index r = 0; r < n; ++r) {
    const CheckIn& c = history[usable[static_cast<std::size_t>(r)]];
    design(r, 0) = 1.0;
    for (Eigen::Index j = 1; j < p; ++j) {
      design(r, j) = *numeric_value(c.env, fit.factors[static_cast<std::size_t>(j - 1)]);
    }
    const EmotionPoint center = grid_center(c.emotion);
    targets(r, 0) = center.attitude;
    targets(r, 1) = center.energy;
  }
  const Eigen::MatrixXd coef = design.completeOrthogonalDecomposition().solve(targets);

  Eigen::RowVectorXd x(p);
  x(0) = 1.0;
  for (Eigen::Index j = 1; j < p; ++j) {
    x(j) = *numeric_value(snapshot, fit.factors[static_cast<std::size_t>(j - 1)]);
  }
  const Eigen::RowVectorXd y = x * coef;
  fit.point = {y(0), y(1)};
  fit.rows = usable.size();
  return fit;
}

Prediction baseline_linreg(std::span<const CheckIn> history, const EnvSnapshot& snapshot,
                           const FactorRegistry& registry) {
  const LinearFit fit = fit_linear(history, snapshot, registry);
  const EmotionPoint clamped{std::clamp(fit.point.attitude, kAxisMin, kAxisMax),
                             std::clamp(fit.point.energy, kAxisMin, kAxisMax)};
  return single(nearest_cell(clamped), snapshot.captured_at);
}

}  // namespace mspsc
