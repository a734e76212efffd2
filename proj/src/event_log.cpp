#include "mspsc/event_log.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include "mspsc/error.hpp"

namespace mspsc {
namespace {

constexpr std::pair<EventType, std::string_view> kEventNames[] = {
    {EventType::ProfileCreated, "ProfileCreated"},
    {EventType::CheckInRecorded, "CheckInRecorded"},
    {EventType::ConfigChanged, "ConfigChanged"},
    {EventType::SourcesUploaded, "SourcesUploaded"},
};

[[noreturn]] void io_failure(const std::string& what, const std::filesystem::path& path) {
  throw Error(Errc::IoError, what + " " + path.string() + ": " + std::strerror(errno));
}

}  // namespace

std::string_view to_string(EventType type) noexcept {
  for (const auto& [t, name] : kEventNames) {
    if (t == type) return name;
  }
  return "?";
}

EventType parse_event_type(std::string_view text) {
  for (const auto& [t, name] : kEventNames) {
    if (name == text) return t;
  }
  throw Error(Errc::ParseError, "unknown event type '" + std::string(text) + "'");
}

nlohmann::json Event::to_json() const {
  return {{"seq", seq}, {"type", to_string(type)}, {"user_id", user_id}, {"data", data}};
}

Event Event::from_json(const nlohmann::json& doc) {
  try {
    Event e;
    e.seq = doc.at("seq").get<std::uint64_t>();
    e.type = parse_event_type(doc.at("type").get<std::string>());
    e.user_id = doc.at("user_id").get<std::string>();
    e.data = doc.at("data");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::ParseError, std::string("event: ") + ex.what());
  }
}

LogScan scan_log(const std::filesystem::path& path) {
  LogScan scan;
  std::ifstream in(path, std::ios::binary);
  if (!in) return scan;
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::uint64_t expected = 1;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      scan.corrupt_at = pos;
      scan.reason = "torn final entry";
      break;
    }
    const std::string_view line(text.data() + pos, nl - pos);
    try {
      Event e = Event::from_json(nlohmann::json::parse(line));
      if (e.seq != expected) {
        throw Error(Errc::ParseError, "sequence " + std::to_string(e.seq) + " where " +
                                          std::to_string(expected) + " was expected");
      }
      ++expected;
      scan.events.push_back(std::move(e));
      scan.offsets.push_back(pos);
    } catch (const std::exception& ex) {
      scan.corrupt_at = pos;
      scan.reason = ex.what();
      break;
    }
    pos = nl + 1;
    scan.valid_bytes = pos;
  }
  return scan;
}

std::vector<Event> read_log_strict(const std::filesystem::path& path) {
  LogScan scan = scan_log(path);
  if (scan.corrupt_at) {
    throw Error(Errc::CorruptLogEntry,
                "offset " + std::to_string(*scan.corrupt_at) + ": " + scan.reason);
  }
  return std::move(scan.events);
}

std::filesystem::path quarantine_tail(const std::filesystem::path& path, std::uint64_t offset) {
  std::filesystem::path backup = path;
  backup += ".corrupt-" + std::to_string(offset);
  std::error_code ec;
  std::filesystem::copy_file(path, backup, std::filesystem::copy_options::overwrite_existing, ec);
  if (ec) throw Error(Errc::IoError, "backup " + backup.string() + ": " + ec.message());
  std::filesystem::resize_file(path, offset, ec);
  if (ec) throw Error(Errc::IoError, "truncate " + path.string() + ": " + ec.message());
  return backup;
}

EventLog::EventLog(std::filesystem::path path, std::uint64_t last_seq, bool sync)
    : path_(std::move(path)), sync_(sync), last_seq_(last_seq) {
  if (path_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
  }
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) io_failure("open", path_);
}

EventLog::~EventLog() {
  if (fd_ >= 0) ::close(fd_);
}

std::uint64_t EventLog::last_seq() const {
  std::lock_guard lock(mu_);
  return last_seq_;
}

std::uint64_t EventLog::append(Event& event) {
  std::lock_guard lock(mu_);
  event.seq = last_seq_ + 1;
  const std::string line = event.to_json().dump() + "\n";
  const off_t before = ::lseek(fd_, 0, SEEK_END);
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      // Do not leave half a line for the next append to land behind.
      if (before >= 0) (void)::ftruncate(fd_, before);
      io_failure("write", path_);
    }
    written += static_cast<std::size_t>(n);
  }
  if (sync_ && ::fdatasync(fd_) != 0) io_failure("sync", path_);
  last_seq_ = event.seq;
  return event.seq;
}

}  // namespace mspsc
