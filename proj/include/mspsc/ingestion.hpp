#pragma once

#include <chrono>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mspsc/factors.hpp"

namespace mspsc {

// One observation from an external export. Keys of `raw` are factor ids;
// values are the textual readings. This is the seam for live API clients.
struct SourceRecord {
  SourceGroup group = SourceGroup::weather;
  Timestamp observed_at{};
  std::map<std::string, std::string> raw;

  friend bool operator==(const SourceRecord&, const SourceRecord&) = default;
};

nlohmann::json record_to_json(const SourceRecord& record);
SourceRecord record_from_json(const nlohmann::json& doc);

struct RowReject {
  std::size_t line = 0;  // 1-based line in the input, header is line 1
  std::string reason;
};

struct TableParse {
  std::vector<SourceRecord> records;
  std::vector<RowReject> rejects;
};

// Header must name: time, temperature_c, precipitation_mm, cloud_cover_pct,
// condition (any order, extra columns ignored). Empty cells are absent
// readings; malformed rows land in `rejects`.
// Throws Error{EmptyFile}, Error{MissingHeader}.
TableParse parse_weather_table(std::string_view text);

// Header must name: date, steps_day, sleep_hours, resting_hr. `date` is
// YYYY-MM-DD (start of that UTC day) or RFC 3339.
TableParse parse_fitness_table(std::string_view text);

// VEVENTs folded into one record per UTC day they touch, with
// event_count_day and busy_hours_day (durations clipped to the day).
// Times without an offset are read as UTC. RRULE expansion is not supported.
// Throws Error{MalformedCalendar}.
std::vector<SourceRecord> parse_calendar_events(std::string_view text);

// How stale a reading may be and still describe `at`.
inline constexpr std::chrono::hours kWeatherStaleness{3};

// For each registry factor, the most recent reading at or before `at` that is
// still fresh: weather within kWeatherStaleness, calendar and fitness on the
// same UTC day. Unusable readings (unparseable, out of range) count as absent.
EnvSnapshot snapshot_at(std::span<const SourceRecord> records, Timestamp at,
                        const FactorRegistry& registry);

}  // namespace mspsc
