#include "oracle.hpp"

#include <cmath>
#include <variant>

namespace mspsc::testing {

double oracle_raw(const FactorValue* hist, const FactorValue& current) {
  if (hist == nullptr) return 0.0;
  double distance = 0.0;
  if (const auto* c = std::get_if<double>(&current)) {
    distance = std::fabs(std::get<double>(*hist) - *c);
  } else {
    distance = std::get<std::string>(*hist) == std::get<std::string>(current) ? 0.0 : 1.0;
  }
  return 1.0 / (distance + 1e-6);
}

std::map<std::string, std::vector<double>> oracle_similarity(std::span<const CheckIn> history,
                                                             const EnvSnapshot& snapshot) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& [id, current] : snapshot.values) {
    std::vector<double> raw;
    double z = 0.0;
    for (const auto& h : history) {
      const auto it = h.env.values.find(id);
      raw.push_back(oracle_raw(it == h.env.values.end() ? nullptr : &it->second, current));
      z += raw.back();
    }
    if (z <= 0.0) continue;
    for (double& r : raw) r /= z;
    out.emplace(id, std::move(raw));
  }
  return out;
}

std::map<int, double> oracle_scores(std::span<const CheckIn> history, const EnvSnapshot& snapshot,
                                    const std::map<std::string, double>& weights) {
  const auto z = oracle_similarity(history, snapshot);
  std::map<int, double> out;
  for (int e = 0; e < 64; ++e) {
    double score = 0.0;
    for (const auto& [id, column] : z) {
      const double w = weights.count(id) ? weights.at(id) : 1.0;
      for (std::size_t t = 0; t < history.size(); ++t) {
        if (history[t].emotion.ordinal() == e) score += w * column[t];
      }
    }
    if (score > 0.0) out.emplace(e, score);
  }
  return out;
}

}  // namespace mspsc::testing
