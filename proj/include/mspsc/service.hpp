#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mspsc/event_log.hpp"
#include "mspsc/ingestion.hpp"
#include "mspsc/personalization.hpp"
#include "mspsc/predictor.hpp"

namespace mspsc {

// Everything the store knows about one user; a pure function of the log.
struct UserState {
  UserProfile profile;
  std::vector<SourceRecord> sources;            // ordered by observed_at
  std::map<std::string, nlohmann::json> acks;   // idempotency key -> acknowledgment

  friend bool operator==(const UserState&, const UserState&) = default;
};

struct ServiceOptions {
  std::filesystem::path store;  // directory; the log is <store>/events.jsonl
  FactorRegistry registry = default_registry();
  EngineConfig config;
  bool sync = true;        // fdatasync each append
  bool read_only = false;  // rebuild only: never writes, never repairs the log
};

struct RebuildReport {
  std::size_t events_applied = 0;
  std::optional<std::uint64_t> corrupt_at;  // offset of the first unusable entry
  std::string reason;
  std::filesystem::path backup;  // where the damaged log was copied, if repaired
};

struct CheckInAck {
  nlohmann::json body;
  bool replayed = false;  // answered from the idempotency table
};

std::filesystem::path log_path(const std::filesystem::path& store);

// Event-sourced engine host. Each mutation is applied to a copy of the user's
// state, appended to the log, and only then published, so an acknowledged
// write is durable and a failed one changes nothing. Writers are serialized
// per user; readers of other users are never blocked by them.
class Service {
 public:
  // Rebuilds from the log. A damaged tail is reported in rebuild_report();
  // unless read_only, it is copied aside and cut off so appends stay valid.
  explicit Service(ServiceOptions options);

  const RebuildReport& rebuild_report() const noexcept { return report_; }
  const FactorRegistry& registry() const noexcept { return options_.registry; }
  const EngineConfig& base_config() const noexcept { return options_.config; }

  // Throws Error{UserExists}, Error{InvalidArgument}.
  nlohmann::json create_user(const std::string& user_id, const ConfigOverrides& overrides = {});

  // Throws Error{UnknownUser}, Error{OutOfOrderCheckIn}, validation errors.
  CheckInAck handle_checkin(const std::string& user_id, const CheckIn& checkin,
                            const std::optional<std::string>& idempotency_key = std::nullopt);

  // Throws Error{UnknownUser}, Error{NoHistoryFallbackImpossible}, validation errors.
  Prediction handle_predict(const std::string& user_id, const EnvSnapshot& snapshot) const;
  // Snapshot assembled from the user's stored source records at `at`.
  Prediction handle_predict_auto(const std::string& user_id, Timestamp at) const;

  PersonalWeights weights(const std::string& user_id) const;
  EngineConfig effective_config(const std::string& user_id) const;

  // Every record must belong to `group`. Throws Error{UnknownUser}, Error{InvalidArgument}.
  std::size_t upload_sources(const std::string& user_id, SourceGroup group,
                             const std::vector<SourceRecord>& records);

  // Replaces the user's overrides. Throws Error{UnknownUser}, Error{InvalidArgument}.
  nlohmann::json set_config(const std::string& user_id, const ConfigOverrides& overrides);

  std::vector<std::string> user_ids() const;
  // Consistent copy of every user's state.
  std::map<std::string, UserState> snapshot() const;

 private:
  struct Slot {
    mutable std::shared_mutex mu;
    UserState state;
  };

  Slot& slot(const std::string& user_id) const;
  nlohmann::json commit(Slot& slot, Event event);

  ServiceOptions options_;
  RebuildReport report_;
  std::unique_ptr<EventLog> log_;
  mutable std::shared_mutex users_mu_;
  std::map<std::string, std::unique_ptr<Slot>> users_;
};

// The single state transition used both live and during rebuild. `slot` is
// empty before ProfileCreated. Returns the response body for the event.
nlohmann::json apply_event(std::optional<UserState>& slot, const Event& event,
                           const FactorRegistry& registry, const EngineConfig& base);

}  // namespace mspsc
