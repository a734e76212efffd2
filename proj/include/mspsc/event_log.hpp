#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace mspsc {

enum class EventType { ProfileCreated, CheckInRecorded, ConfigChanged, SourcesUploaded };

std::string_view to_string(EventType type) noexcept;
EventType parse_event_type(std::string_view text);

// One line of the store: {"seq": n, "type": "...", "user_id": "...", "data": {...}}.
struct Event {
  std::uint64_t seq = 0;
  EventType type = EventType::ProfileCreated;
  std::string user_id;
  nlohmann::json data;

  nlohmann::json to_json() const;
  static Event from_json(const nlohmann::json& doc);
};

struct LogScan {
  std::vector<Event> events;
  std::vector<std::uint64_t> offsets;       // byte offset of each event's line
  std::uint64_t valid_bytes = 0;            // prefix holding `events`
  std::optional<std::uint64_t> corrupt_at;  // byte offset of the first bad entry
  std::string reason;
};

// Reads entries until the first one that is torn (no trailing newline),
// unparseable, or out of sequence. A missing file scans as empty.
LogScan scan_log(const std::filesystem::path& path);

// Throws Error{CorruptLogEntry} instead of stopping quietly.
std::vector<Event> read_log_strict(const std::filesystem::path& path);

// Moves a damaged tail aside: the whole file is copied to
// "<path>.corrupt-<offset>" and the log is cut back to `offset`.
// Returns the backup path. Throws Error{IoError}.
std::filesystem::path quarantine_tail(const std::filesystem::path& path, std::uint64_t offset);

// Append-only writer. Every append is a full line followed by fsync, so an
// acknowledged event survives a crash. Appends are serialized internally.
class EventLog {
 public:
  // Opens (creating if needed) for append; sequence numbers continue after
  // `last_seq`. Throws Error{IoError}.
  EventLog(std::filesystem::path path, std::uint64_t last_seq, bool sync = true);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  // Assigns the next sequence number, writes, syncs. Throws Error{IoError}.
  std::uint64_t append(Event& event);

  const std::filesystem::path& path() const noexcept { return path_; }
  std::uint64_t last_seq() const;

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  bool sync_;
  mutable std::mutex mu_;
  std::uint64_t last_seq_;
};

}  // namespace mspsc
