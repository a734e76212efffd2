#include "mspsc/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <optional>

#include "mspsc/error.hpp"

namespace mspsc {
namespace {

using namespace std::chrono;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

// Comma-separated fields; double quotes group commas and "" escapes a quote.
std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) return std::nullopt;
  for (auto& f : fields) f = std::string(trim(f));
  return fields;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

Timestamp parse_date_or_time(std::string_view s) {
  s = trim(s);
  if (s.size() == 10) {
    return parse_rfc3339(std::string(s) + "T00:00:00Z");
  }
  return parse_rfc3339(s);
}

struct Column {
  std::string name;
  bool numeric;
};

TableParse parse_table(std::string_view text, SourceGroup group, std::string_view time_column,
                       const std::vector<Column>& columns) {
  const auto lines = split_lines(text);
  std::size_t header_line = 0;
  while (header_line < lines.size() && trim(lines[header_line]).empty()) ++header_line;
  if (header_line == lines.size()) throw Error(Errc::EmptyFile, "no header row");

  const auto header = split_csv(lines[header_line]);
  if (!header) throw Error(Errc::MissingHeader, "unterminated quote in header");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header->size(); ++i) {
    std::string name((*header)[i]);
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    index.emplace(name, i);
  }
  std::vector<std::string> required{std::string(time_column)};
  for (const auto& c : columns) required.push_back(c.name);
  for (const auto& name : required) {
    if (!index.count(name)) throw Error(Errc::MissingHeader, "missing column '" + name + "'");
  }

  TableParse out;
  for (std::size_t l = header_line + 1; l < lines.size(); ++l) {
    if (trim(lines[l]).empty()) continue;
    const std::size_t line_no = l + 1;
    const auto fields = split_csv(lines[l]);
    if (!fields || fields->size() != header->size()) {
      out.rejects.push_back({line_no, "expected " + std::to_string(header->size()) + " fields"});
      continue;
    }
    SourceRecord record;
    record.group = group;
    try {
      record.observed_at = parse_date_or_time((*fields)[index.at(std::string(time_column))]);
    } catch (const Error& e) {
      out.rejects.push_back({line_no, std::string(time_column) + ": " + e.what()});
      continue;
    }
    std::optional<std::string> problem;
    for (const auto& c : columns) {
      const std::string& cell = (*fields)[index.at(c.name)];
      if (cell.empty()) continue;
      if (c.numeric) {
        const auto value = parse_number(cell);
        if (!value) {
          problem = c.name + ": '" + cell + "' is not a number";
          break;
        }
        record.raw[c.name] = format_number(*value);
      } else {
        std::string token = cell;
        std::transform(token.begin(), token.end(), token.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        record.raw[c.name] = token;
      }
    }
    if (problem) {
      out.rejects.push_back({line_no, *problem});
      continue;
    }
    out.records.push_back(std::move(record));
  }
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const SourceRecord& a, const SourceRecord& b) { return a.observed_at < b.observed_at; });
  return out;
}

// ---- iCalendar ----

struct CalendarTime {
  Timestamp at;
  bool date_only = false;
};

CalendarTime parse_ical_time(std::string_view value, bool date_param) {
  value = trim(value);
  const auto digits = [&](std::size_t pos, std::size_t n) {
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
      if (i >= value.size() || !std::isdigit(static_cast<unsigned char>(value[i]))) {
        throw Error(Errc::MalformedCalendar, "bad date-time '" + std::string(value) + "'");
      }
      v = v * 10 + (value[i] - '0');
    }
    return v;
  };
  const year_month_day ymd{year{digits(0, 4)}, month{static_cast<unsigned>(digits(4, 2))},
                           day{static_cast<unsigned>(digits(6, 2))}};
  if (!ymd.ok()) throw Error(Errc::MalformedCalendar, "bad date '" + std::string(value) + "'");
  if (value.size() == 8 || date_param) {
    if (value.size() != 8) throw Error(Errc::MalformedCalendar, "bad DATE '" + std::string(value) + "'");
    return {sys_days{ymd}, true};
  }
  if (value.size() < 15 || value[8] != 'T' ||
      !(value.size() == 15 || (value.size() == 16 && (value[15] == 'Z' || value[15] == 'z')))) {
    throw Error(Errc::MalformedCalendar, "bad DATE-TIME '" + std::string(value) + "'");
  }
  const int hh = digits(9, 2);
  const int mm = digits(11, 2);
  const int ss = digits(13, 2);
  if (hh > 23 || mm > 59 || ss > 60) {
    throw Error(Errc::MalformedCalendar, "bad time '" + std::string(value) + "'");
  }
  return {sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss}, false};
}

seconds parse_ical_duration(std::string_view value) {
  value = trim(value);
  int sign = 1;
  if (!value.empty() && (value.front() == '+' || value.front() == '-')) {
    sign = value.front() == '-' ? -1 : 1;
    value.remove_prefix(1);
  }
  if (value.empty() || value.front() != 'P') {
    throw Error(Errc::MalformedCalendar, "bad DURATION '" + std::string(value) + "'");
  }
  long long total = 0;
  long long number = 0;
  bool have_number = false;
  bool in_time = false;
  for (std::size_t i = 1; i < value.size(); ++i) {
    const char c = value[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      number = number * 10 + (c - '0');
      have_number = true;
      continue;
    }
    if (c == 'T') {
      in_time = true;
      continue;
    }
    if (!have_number) throw Error(Errc::MalformedCalendar, "bad DURATION '" + std::string(value) + "'");
    switch (c) {
      case 'W': total += number * 7 * 86400; break;
      case 'D': total += number * 86400; break;
      case 'H': total += number * 3600; break;
      case 'M': total += in_time ? number * 60 : 0; break;
      case 'S': total += number; break;
      default: throw Error(Errc::MalformedCalendar, "bad DURATION '" + std::string(value) + "'");
    }
    number = 0;
    have_number = false;
  }
  if (have_number) throw Error(Errc::MalformedCalendar, "bad DURATION '" + std::string(value) + "'");
  return seconds{sign * total};
}

struct Property {
  std::string name;
  std::map<std::string, std::string> params;
  std::string value;
};

Property parse_property(std::string_view line) {
  Property p;
  const std::size_t colon = [&] {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == ':' && !quoted) return i;
    }
    return std::string_view::npos;
  }();
  if (colon == std::string_view::npos) {
    throw Error(Errc::MalformedCalendar, "content line without ':' '" + std::string(line) + "'");
  }
  std::string_view head = line.substr(0, colon);
  p.value = std::string(line.substr(colon + 1));
  std::size_t semi = head.find(';');
  p.name = std::string(head.substr(0, semi));
  std::transform(p.name.begin(), p.name.end(), p.name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  while (semi != std::string_view::npos) {
    const std::size_t next = head.find(';', semi + 1);
    const std::string_view param = head.substr(semi + 1, next == std::string_view::npos ? next : next - semi - 1);
    const std::size_t eq = param.find('=');
    if (eq != std::string_view::npos) {
      std::string key(param.substr(0, eq));
      std::transform(key.begin(), key.end(), key.begin(),
                     [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
      p.params[key] = std::string(param.substr(eq + 1));
    }
    semi = next;
  }
  return p;
}

struct Event {
  std::optional<CalendarTime> start;
  std::optional<CalendarTime> end;
  std::optional<seconds> duration;
  bool cancelled = false;
};

}  // namespace

nlohmann::json record_to_json(const SourceRecord& record) {
  return {{"group", to_string(record.group)},
          {"observed_at", format_rfc3339(record.observed_at)},
          {"raw", record.raw}};
}

SourceRecord record_from_json(const nlohmann::json& doc) {
  try {
    SourceRecord r;
    r.group = parse_source_group(doc.at("group").get<std::string>());
    r.observed_at = parse_rfc3339(doc.at("observed_at").get<std::string>());
    for (const auto& [key, value] : doc.at("raw").items()) {
      if (value.is_null()) continue;
      r.raw[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("source record: ") + e.what());
  }
}

TableParse parse_weather_table(std::string_view text) {
  return parse_table(text, SourceGroup::weather, "time",
                     {{"temperature_c", true},
                      {"precipitation_mm", true},
                      {"cloud_cover_pct", true},
                      {"condition", false}});
}

TableParse parse_fitness_table(std::string_view text) {
  return parse_table(text, SourceGroup::fitness, "date",
                     {{"steps_day", true}, {"sleep_hours", true}, {"resting_hr", true}});
}

std::vector<SourceRecord> parse_calendar_events(std::string_view text) {
  // Unfold continuation lines first.
  std::vector<std::string> lines;
  for (std::string_view raw : split_lines(text)) {
    if (!raw.empty() && (raw.front() == ' ' || raw.front() == '\t') && !lines.empty()) {
      lines.back() += std::string(raw.substr(1));
    } else if (!trim(raw).empty()) {
      lines.emplace_back(raw);
    }
  }
  if (lines.empty()) return {};

  std::vector<std::string> stack;
  std::vector<Event> events;
  bool saw_calendar = false;
  for (const auto& line : lines) {
    const Property p = parse_property(line);
    std::string value = p.value;
    std::transform(value.begin(), value.end(), value.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (p.name == "BEGIN") {
      if (stack.empty() && value != "VCALENDAR") {
        throw Error(Errc::MalformedCalendar, "document must start with BEGIN:VCALENDAR");
      }
      if (value == "VCALENDAR") saw_calendar = true;
      if (value == "VEVENT") events.emplace_back();
      stack.push_back(value);
      continue;
    }
    if (p.name == "END") {
      if (stack.empty() || stack.back() != value) {
        throw Error(Errc::MalformedCalendar, "unbalanced END:" + value);
      }
      if (value == "VEVENT" && !events.back().start) {
        throw Error(Errc::MalformedCalendar, "VEVENT without DTSTART");
      }
      stack.pop_back();
      continue;
    }
    if (stack.empty()) throw Error(Errc::MalformedCalendar, "content outside VCALENDAR");
    if (stack.back() != "VEVENT") continue;

    Event& e = events.back();
    const auto value_param = p.params.find("VALUE");
    const bool date_param = value_param != p.params.end() && value_param->second == "DATE";
    if (p.name == "DTSTART") {
      e.start = parse_ical_time(p.value, date_param);
    } else if (p.name == "DTEND") {
      e.end = parse_ical_time(p.value, date_param);
    } else if (p.name == "DURATION") {
      e.duration = parse_ical_duration(p.value);
    } else if (p.name == "STATUS") {
      e.cancelled = value == "CANCELLED";
    }
  }
  if (!stack.empty() || !saw_calendar) throw Error(Errc::MalformedCalendar, "missing END:VCALENDAR");

  struct DayLoad {
    int events = 0;
    seconds busy{0};
  };
  std::map<sys_days, DayLoad> days;
  for (const auto& e : events) {
    if (e.cancelled) continue;
    const Timestamp begin = e.start->at;
    Timestamp end = begin;
    if (e.end) {
      end = e.end->at;
    } else if (e.duration) {
      end = begin + *e.duration;
    } else if (e.start->date_only) {
      end = begin + std::chrono::days{1};
    }
    if (end < begin) throw Error(Errc::MalformedCalendar, "event ends before it starts");

    if (end == begin) {
      ++days[floor<std::chrono::days>(begin)].events;
      continue;
    }
    for (sys_days d = floor<std::chrono::days>(begin); Timestamp{d} < end; d += std::chrono::days{1}) {
      const Timestamp lo = std::max<Timestamp>(begin, d);
      const Timestamp hi = std::min<Timestamp>(end, d + std::chrono::days{1});
      DayLoad& load = days[d];
      ++load.events;
      load.busy += hi - lo;
    }
  }

  std::vector<SourceRecord> out;
  for (const auto& [d, load] : days) {
    SourceRecord r;
    r.group = SourceGroup::calendar;
    r.observed_at = d;
    r.raw["event_count_day"] = std::to_string(load.events);
    r.raw["busy_hours_day"] = format_number(static_cast<double>(load.busy.count()) / 3600.0);
    out.push_back(std::move(r));
  }
  return out;
}

EnvSnapshot snapshot_at(std::span<const SourceRecord> records, Timestamp at,
                        const FactorRegistry& registry) {
  struct Pick {
    Timestamp observed;
    FactorValue value;
  };
  std::map<std::string, Pick, std::less<>> picks;
  for (const auto& record : records) {
    if (record.observed_at > at) continue;
    for (const auto& [id, text] : record.raw) {
      const FactorDescriptor* d = registry.find(id);
      if (d == nullptr) continue;
      const bool fresh = d->group == SourceGroup::weather
                             ? at - record.observed_at <= kWeatherStaleness
                             : day_number(record.observed_at) == day_number(at);
      if (!fresh) continue;

      FactorValue value;
      if (d->kind == FactorKind::numeric) {
        const auto number = parse_number(text);
        if (!number) continue;
        value = *number;
      } else {
        value = std::string(trim(text));
      }
      EnvSnapshot probe;
      probe.values.emplace(id, value);
      try {
        probe = validate_snapshot(std::move(probe), registry);
      } catch (const Error&) {
        continue;
      }
      auto it = picks.find(id);
      if (it == picks.end() || record.observed_at >= it->second.observed) {
        picks.insert_or_assign(id, Pick{record.observed_at, probe.values.begin()->second});
      }
    }
  }
  EnvSnapshot snapshot;
  snapshot.captured_at = at;
  for (auto& [id, pick] : picks) snapshot.values.emplace(id, std::move(pick.value));
  return snapshot;
}

}  // namespace mspsc
