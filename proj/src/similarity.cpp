#include "mspsc/similarity.hpp"

#include <cmath>

#include "mspsc/error.hpp"
#include "mspsc/kernels.hpp"

namespace mspsc {
namespace {

void check_kind(const FactorValue& value, FactorKind kind) {
  const bool numeric = is_numeric(value);
  if (numeric != (kind == FactorKind::numeric)) {
    throw Error(Errc::KindMismatch, std::string("value is ") + (numeric ? "numeric" : "categorical") +
                                        " but factor is " + std::string(to_string(kind)));
  }
}

}  // namespace

double raw_similarity(const FactorValue* hist, const FactorValue& current, FactorKind kind) {
  check_kind(current, kind);
  if (hist == nullptr) return 0.0;
  check_kind(*hist, kind);
  if (kind == FactorKind::numeric) {
    return 1.0 / (std::abs(std::get<double>(*hist) - std::get<double>(current)) + kDivisionEpsilon);
  }
  const double distance = std::get<std::string>(*hist) == std::get<std::string>(current) ? 0.0 : 1.0;
  return 1.0 / (distance + kDivisionEpsilon);
}

NormalizedFactor normalize_factor(std::span<const double> raw) {
  NormalizedFactor out;
  out.weights.assign(raw.begin(), raw.end());
  const double total = kernels::sum(out.weights);
  if (total > 0.0) {
    kernels::divide(out.weights, total);
    out.active = true;
  }
  return out;
}

const FactorColumn* SimilarityTable::find(std::string_view factor_id) const noexcept {
  for (const auto& c : columns_) {
    if (c.factor_id == factor_id) return &c;
  }
  return nullptr;
}

double SimilarityTable::weight(std::string_view factor_id, std::size_t position) const {
  const FactorColumn* column = find(factor_id);
  if (column == nullptr) return 0.0;
  if (position >= column->weights.size()) {
    throw Error(Errc::OutOfRange, "history position " + std::to_string(position));
  }
  return column->weights[position];
}

std::vector<std::string> SimilarityTable::active_factors() const {
  std::vector<std::string> out;
  for (const auto& c : columns_) {
    if (c.active) out.push_back(c.factor_id);
  }
  return out;
}

SimilarityTable retrieve(std::span<const CheckIn> history, const EnvSnapshot& snapshot,
                         const FactorRegistry& registry) {
  if (history.empty()) throw Error(Errc::EmptyHistory, "no check-ins to retrieve from");

  const std::size_t n = history.size();
  std::vector<FactorColumn> columns;
  std::vector<double> values(n);
  std::vector<std::uint8_t> present(n);
  std::vector<double> raw(n);

  for (const auto& descriptor : registry.descriptors()) {
    const FactorValue* current = snapshot.get(descriptor.id);
    if (current == nullptr) continue;

    if (descriptor.kind == FactorKind::numeric) {
      check_kind(*current, descriptor.kind);
      for (std::size_t t = 0; t < n; ++t) {
        const FactorValue* hist = history[t].env.get(descriptor.id);
        if (hist != nullptr) check_kind(*hist, descriptor.kind);
        present[t] = hist != nullptr;
        values[t] = hist != nullptr ? std::get<double>(*hist) : 0.0;
      }
      kernels::reciprocal_distance(values, present, std::get<double>(*current), kDivisionEpsilon,
                                   raw);
    } else {
      for (std::size_t t = 0; t < n; ++t) {
        raw[t] = raw_similarity(history[t].env.get(descriptor.id), *current, descriptor.kind);
      }
    }

    NormalizedFactor normalized = normalize_factor(raw);
    columns.push_back(FactorColumn{descriptor.id, descriptor.kind, std::move(normalized.weights),
                                   normalized.active});
  }
  return SimilarityTable(n, std::move(columns));
}

}  // namespace mspsc
