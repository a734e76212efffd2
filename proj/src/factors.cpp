#include "mspsc/factors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "mspsc/error.hpp"

namespace mspsc {

std::string_view to_string(FactorKind kind) noexcept {
  return kind == FactorKind::numeric ? "numeric" : "categorical";
}

std::string_view to_string(SourceGroup group) noexcept {
  switch (group) {
    case SourceGroup::weather: return "weather";
    case SourceGroup::calendar: return "calendar";
    case SourceGroup::fitness: return "fitness";
  }
  return "weather";
}

FactorKind parse_factor_kind(std::string_view text) {
  if (text == "numeric") return FactorKind::numeric;
  if (text == "categorical") return FactorKind::categorical;
  throw Error(Errc::ParseError, "unknown factor kind '" + std::string(text) + "'");
}

SourceGroup parse_source_group(std::string_view text) {
  for (auto g : kSourceGroups) {
    if (to_string(g) == text) return g;
  }
  throw Error(Errc::ParseError, "unknown source group '" + std::string(text) + "'");
}

FactorRegistry::FactorRegistry(std::vector<FactorDescriptor> descriptors, RangePolicy policy)
    : descriptors_(std::move(descriptors)), policy_(policy) {
  std::set<std::string, std::less<>> seen;
  for (const auto& d : descriptors_) {
    if (d.id.empty()) throw Error(Errc::InvalidArgument, "factor id must not be empty");
    if (!seen.insert(d.id).second) {
      throw Error(Errc::InvalidArgument, "duplicate factor id '" + d.id + "'");
    }
    if (d.range && !(d.range->first < d.range->second)) {
      throw Error(Errc::InvalidArgument, "factor '" + d.id + "' has range with lo >= hi");
    }
    if (d.range && d.kind == FactorKind::categorical) {
      throw Error(Errc::InvalidArgument, "categorical factor '" + d.id + "' cannot have a range");
    }
  }
}

const FactorDescriptor* FactorRegistry::find(std::string_view id) const noexcept {
  auto it = std::find_if(descriptors_.begin(), descriptors_.end(),
                         [&](const FactorDescriptor& d) { return d.id == id; });
  return it == descriptors_.end() ? nullptr : &*it;
}

const FactorDescriptor& FactorRegistry::at(std::string_view id) const {
  if (const auto* d = find(id)) return *d;
  throw Error(Errc::UnknownFactor, std::string(id));
}

std::vector<std::string> FactorRegistry::ids() const {
  std::vector<std::string> out;
  out.reserve(descriptors_.size());
  for (const auto& d : descriptors_) out.push_back(d.id);
  return out;
}

FactorRegistry FactorRegistry::from_json(const nlohmann::json& doc) {
  try {
    RangePolicy policy = RangePolicy::reject;
    if (doc.contains("range_policy")) {
      const auto p = doc.at("range_policy").get<std::string>();
      if (p == "clamp") {
        policy = RangePolicy::clamp;
      } else if (p != "reject") {
        throw Error(Errc::ParseError, "range_policy must be 'reject' or 'clamp'");
      }
    }
    std::vector<FactorDescriptor> descriptors;
    for (const auto& item : doc.at("factors")) {
      FactorDescriptor d;
      d.id = item.at("id").get<std::string>();
      d.kind = parse_factor_kind(item.at("kind").get<std::string>());
      d.unit = item.value("unit", "");
      d.group = parse_source_group(item.at("group").get<std::string>());
      if (item.contains("range") && !item.at("range").is_null()) {
        const auto& r = item.at("range");
        if (!r.is_array() || r.size() != 2) {
          throw Error(Errc::ParseError, "range of '" + d.id + "' must be [lo, hi]");
        }
        d.range = std::make_pair(r[0].get<double>(), r[1].get<double>());
      }
      if (item.contains("categories")) {
        d.categories = item.at("categories").get<std::vector<std::string>>();
      }
      descriptors.push_back(std::move(d));
    }
    return FactorRegistry(std::move(descriptors), policy);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("registry: ") + e.what());
  }
}

nlohmann::json FactorRegistry::to_json() const {
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& d : descriptors_) {
    nlohmann::json item{{"id", d.id},
                        {"kind", to_string(d.kind)},
                        {"unit", d.unit},
                        {"group", to_string(d.group)}};
    if (d.range) item["range"] = {d.range->first, d.range->second};
    if (!d.categories.empty()) item["categories"] = d.categories;
    factors.push_back(std::move(item));
  }
  return {{"range_policy", policy_ == RangePolicy::clamp ? "clamp" : "reject"},
          {"factors", std::move(factors)}};
}

FactorRegistry FactorRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open registry " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, path.string() + ": " + e.what());
  }
  return from_json(doc);
}

EnvSnapshot validate_snapshot(EnvSnapshot snapshot, const FactorRegistry& registry) {
  for (auto& [id, value] : snapshot.values) {
    const FactorDescriptor* d = registry.find(id);
    if (d == nullptr) throw Error(Errc::UnknownFactor, id);

    if (d->kind == FactorKind::numeric) {
      auto* number = std::get_if<double>(&value);
      if (number == nullptr) {
        throw Error(Errc::KindMismatch, id + " expects a number");
      }
      if (!std::isfinite(*number)) {
        throw Error(Errc::OutOfRange, id + " is not finite");
      }
      if (d->range && (*number < d->range->first || *number > d->range->second)) {
        if (registry.policy() == RangePolicy::reject) {
          throw Error(Errc::OutOfRange, id + "=" + std::to_string(*number));
        }
        *number = std::clamp(*number, d->range->first, d->range->second);
      }
    } else {
      auto* token = std::get_if<std::string>(&value);
      if (token == nullptr) {
        throw Error(Errc::KindMismatch, id + " expects a categorical token");
      }
      if (!d->categories.empty() &&
          std::find(d->categories.begin(), d->categories.end(), *token) == d->categories.end()) {
        throw Error(Errc::OutOfRange, id + "='" + *token + "'");
      }
    }
  }
  return snapshot;
}

FactorRegistry default_registry() {
  using SG = SourceGroup;
  using FK = FactorKind;
  return FactorRegistry({
      {"temperature_c", FK::numeric, "degC", std::pair{-40.0, 50.0}, SG::weather, {}},
      {"precipitation_mm", FK::numeric, "mm", std::pair{0.0, 500.0}, SG::weather, {}},
      {"cloud_cover_pct", FK::numeric, "%", std::pair{0.0, 100.0}, SG::weather, {}},
      {"condition", FK::categorical, "", std::nullopt, SG::weather,
       {"clear", "cloudy", "rain", "snow", "fog", "storm"}},
      {"event_count_day", FK::numeric, "events", std::pair{0.0, 200.0}, SG::calendar, {}},
      {"busy_hours_day", FK::numeric, "h", std::pair{0.0, 24.0}, SG::calendar, {}},
      {"steps_day", FK::numeric, "steps", std::pair{0.0, 200000.0}, SG::fitness, {}},
      {"sleep_hours", FK::numeric, "h", std::pair{0.0, 24.0}, SG::fitness, {}},
      {"resting_hr", FK::numeric, "bpm", std::pair{20.0, 250.0}, SG::fitness, {}},
  });
}

}  // namespace mspsc
