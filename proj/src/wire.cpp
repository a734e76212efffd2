#include "mspsc/wire.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "mspsc/error.hpp"

namespace mspsc {

using nlohmann::json;

json env_values_to_json(const EnvSnapshot& snapshot) {
  json out = json::object();
  for (const auto& [id, value] : snapshot.values) {
    std::visit([&](const auto& v) { out[id] = v; }, value);
  }
  return out;
}

EnvSnapshot env_values_from_json(const json& values, Timestamp captured_at) {
  if (!values.is_object()) throw Error(Errc::ParseError, "env must be an object");
  EnvSnapshot snapshot;
  snapshot.captured_at = captured_at;
  for (const auto& [id, value] : values.items()) {
    if (value.is_null()) continue;
    if (value.is_number()) {
      snapshot.values.emplace(id, value.get<double>());
    } else if (value.is_string()) {
      snapshot.values.emplace(id, value.get<std::string>());
    } else {
      throw Error(Errc::ParseError, "env value for '" + id + "' must be number, string or null");
    }
  }
  return snapshot;
}

json snapshot_to_json(const EnvSnapshot& snapshot) {
  return {{"captured_at", format_rfc3339(snapshot.captured_at)},
          {"values", env_values_to_json(snapshot)}};
}

EnvSnapshot snapshot_from_json(const json& doc) {
  try {
    const Timestamp at = parse_rfc3339(doc.at("captured_at").get<std::string>());
    return env_values_from_json(doc.at("values"), at);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("snapshot: ") + e.what());
  }
}

json checkin_to_json(const CheckIn& checkin) {
  return {{"user_id", checkin.user_id},
          {"at", format_rfc3339(checkin.at)},
          {"emotion", checkin.emotion.ordinal()},
          {"env", env_values_to_json(checkin.env)}};
}

CheckIn checkin_from_json(const json& doc) {
  try {
    CheckIn c;
    c.user_id = doc.at("user_id").get<std::string>();
    c.at = parse_rfc3339(doc.at("at").get<std::string>());
    const auto& emotion = doc.at("emotion");
    if (!emotion.is_number_integer()) throw Error(Errc::ParseError, "emotion must be an integer");
    c.emotion = GridIndex::from_ordinal(emotion.get<int>());
    c.env = env_values_from_json(doc.value("env", json::object()), c.at);
    return c;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("check-in: ") + e.what());
  }
}

Dataset read_dataset(std::istream& in) {
  Dataset dataset;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    CheckIn c = checkin_from_json(doc);
    auto& rows = dataset[c.user_id];
    if (!rows.empty() && !(rows.back().at < c.at)) {
      throw Error(Errc::OutOfOrderCheckIn,
                  "line " + std::to_string(line_no) + ": user '" + c.user_id + "'");
    }
    rows.push_back(std::move(c));
  }
  return dataset;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open dataset " + path.string());
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  std::vector<const CheckIn*> rows;
  for (const auto& [user, history] : dataset) {
    for (const auto& c : history) rows.push_back(&c);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const CheckIn* a, const CheckIn* b) {
    return a->at < b->at;
  });
  for (const CheckIn* c : rows) out << checkin_to_json(*c).dump() << '\n';
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write dataset " + path.string());
  write_dataset(out, dataset);
}

}  // namespace mspsc
