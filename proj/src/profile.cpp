#include "mspsc/profile.hpp"

#include <cmath>

#include "mspsc/error.hpp"

namespace mspsc {

void EngineConfig::validate() const {
  if (k == 0) throw Error(Errc::InvalidArgument, "k must be positive");
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw Error(Errc::InvalidArgument, "eps must be >= 0");
  if (!(theta > 0.0 && theta <= 1.0)) throw Error(Errc::InvalidArgument, "theta must be in (0,1]");
  if (n_max == 0) throw Error(Errc::InvalidArgument, "n_max must be positive");
  if (w_init < 0) throw Error(Errc::InvalidArgument, "w_init must be >= 0");
  if (reset_floor < 0) throw Error(Errc::InvalidArgument, "reset_floor must be >= 0");
}

EngineConfig ConfigOverrides::apply(EngineConfig base) const {
  if (k) base.k = *k;
  if (eps) base.eps = *eps;
  if (theta) base.theta = *theta;
  if (n_max) base.n_max = *n_max;
  return base;
}

nlohmann::json ConfigOverrides::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  if (k) out["k"] = *k;
  if (eps) out["eps"] = *eps;
  if (theta) out["theta"] = *theta;
  if (n_max) out["n_max"] = *n_max;
  return out;
}

ConfigOverrides ConfigOverrides::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(Errc::ParseError, "config overrides must be an object");
  ConfigOverrides o;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (value.is_null()) continue;
      if (key == "k") {
        o.k = value.get<std::size_t>();
      } else if (key == "eps") {
        o.eps = value.get<double>();
      } else if (key == "theta") {
        o.theta = value.get<double>();
      } else if (key == "n_max") {
        o.n_max = value.get<std::size_t>();
      } else {
        throw Error(Errc::ParseError, "unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("config overrides: ") + e.what());
  }
  o.apply(EngineConfig{}).validate();
  return o;
}

nlohmann::json PersonalWeights::to_json() const {
  nlohmann::json w = nlohmann::json::object();
  for (const auto& [id, value] : weights) w[id] = value;
  return {{"weights", std::move(w)}, {"feedback_rounds", feedback_rounds}, {"w_init", init}};
}

PersonalWeights initial_weights(const FactorRegistry& registry, std::int64_t w_init) {
  PersonalWeights w;
  w.init = w_init;
  for (const auto& d : registry.descriptors()) w.weights.emplace(d.id, w_init);
  return w;
}

UserProfile make_profile(std::string user_id, const FactorRegistry& registry,
                         const EngineConfig& config) {
  UserProfile p;
  p.user_id = std::move(user_id);
  p.weights = initial_weights(registry, config.w_init);
  return p;
}

}  // namespace mspsc
