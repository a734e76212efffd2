#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mspsc/factors.hpp"

namespace mspsc {

// Check-in wire form:
//   {"user_id": "...", "at": "<RFC 3339>", "emotion": 0..63, "env": {factor: value}}
// A null env value and a missing key both mean "absent"; output omits absent
// factors.
nlohmann::json env_values_to_json(const EnvSnapshot& snapshot);
EnvSnapshot env_values_from_json(const nlohmann::json& values, Timestamp captured_at);

// Standalone snapshot document: {"captured_at": "...", "values": {...}}.
nlohmann::json snapshot_to_json(const EnvSnapshot& snapshot);
EnvSnapshot snapshot_from_json(const nlohmann::json& doc);

nlohmann::json checkin_to_json(const CheckIn& checkin);
CheckIn checkin_from_json(const nlohmann::json& doc);

// Per-user, time-ordered histories keyed by user id.
using Dataset = std::map<std::string, std::vector<CheckIn>>;

// Line-delimited check-ins, any interleaving of users. Throws
// Error{OutOfOrderCheckIn} if a user's rows are not strictly increasing in time.
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

// Rows are written in global time order (ties by user id).
void write_dataset(std::ostream& out, const Dataset& dataset);
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);

}  // namespace mspsc
