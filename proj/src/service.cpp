#include "mspsc/service.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>

#include "mspsc/error.hpp"
#include "mspsc/wire.hpp"

namespace mspsc {
namespace {

nlohmann::json votes_to_json(const FeedbackResult& feedback) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : feedback.votes) {
    out.push_back({{"factor", v.factor_id},
                   {"voted", v.voted.ordinal()},
                   {"hit", v.hit},
                   {"weight_before", v.weight_before},
                   {"weight_after", v.weight_after}});
  }
  return out;
}

void require_valid_id(const std::string& user_id) {
  if (user_id.empty() || user_id.size() > 128) {
    throw Error(Errc::InvalidArgument, "user id must be 1..128 characters");
  }
  for (const unsigned char c : user_id) {
    if (!(std::isalnum(c) || c == '-' || c == '_' || c == '.')) {
      throw Error(Errc::InvalidArgument, "user id may only use [A-Za-z0-9._-]");
    }
  }
}

}  // namespace

std::filesystem::path log_path(const std::filesystem::path& store) {
  return store / "events.jsonl";
}

nlohmann::json apply_event(std::optional<UserState>& slot, const Event& event,
                           const FactorRegistry& registry, const EngineConfig& base) {
  if (event.type == EventType::ProfileCreated) {
    if (slot) throw Error(Errc::UserExists, "user '" + event.user_id + "' already exists");
    require_valid_id(event.user_id);
    const auto overrides = event.data.contains("overrides")
                               ? ConfigOverrides::from_json(event.data.at("overrides"))
                               : ConfigOverrides{};
    const EngineConfig config = overrides.apply(base);
    config.validate();
    UserState state;
    state.profile = make_profile(event.user_id, registry, config);
    state.profile.overrides = overrides;
    slot = std::move(state);
    return {{"user_id", event.user_id},
            {"config", overrides.to_json()},
            {"weights", slot->profile.weights.to_json()}};
  }

  if (!slot) throw Error(Errc::UnknownUser, "no user '" + event.user_id + "'");
  UserState& state = *slot;
  try {
    switch (event.type) {
      case EventType::CheckInRecorded: {
        CheckIn checkin = checkin_from_json(event.data.at("checkin"));
        const EngineConfig config = state.profile.overrides.apply(base);
        const FeedbackResult feedback = process_feedback(state.profile, checkin, registry, config);
        nlohmann::json ack = {{"user_id", event.user_id},
                              {"at", format_rfc3339(checkin.at)},
                              {"emotion", checkin.emotion.ordinal()},
                              {"history_size", state.profile.history.size()},
                              {"votes", votes_to_json(feedback)},
                              {"weights", state.profile.weights.to_json()}};
        if (const auto key = event.data.find("idempotency_key");
            key != event.data.end() && key->is_string()) {
          state.acks[key->get<std::string>()] = ack;
        }
        return ack;
      }
      case EventType::ConfigChanged: {
        const auto overrides = ConfigOverrides::from_json(event.data.at("overrides"));
        overrides.apply(base).validate();
        state.profile.overrides = overrides;
        return {{"user_id", event.user_id}, {"config", overrides.to_json()}};
      }
      case EventType::SourcesUploaded: {
        const SourceGroup group = parse_source_group(event.data.at("group").get<std::string>());
        std::vector<SourceRecord> records;
        for (const auto& r : event.data.at("records")) {
          SourceRecord record = record_from_json(r);
          if (record.group != group) {
            throw Error(Errc::InvalidArgument, "record of group '" +
                                                   std::string(to_string(record.group)) +
                                                   "' in a '" + std::string(to_string(group)) +
                                                   "' upload");
          }
          records.push_back(std::move(record));
        }
        state.sources.insert(state.sources.end(), records.begin(), records.end());
        std::stable_sort(state.sources.begin(), state.sources.end(),
                         [](const SourceRecord& a, const SourceRecord& b) {
                           return a.observed_at < b.observed_at;
                         });
        return {{"user_id", event.user_id},
                {"accepted", records.size()},
                {"stored", state.sources.size()}};
      }
      case EventType::ProfileCreated:
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string(to_string(event.type)) + ": " + e.what());
  }
  throw Error(Errc::InvalidArgument, "unhandled event");
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  options_.config.validate();
  const auto path = log_path(options_.store);
  const LogScan scan = scan_log(path);

  std::map<std::string, std::optional<UserState>> states;
  std::uint64_t last_seq = 0;
  for (std::size_t i = 0; i < scan.events.size(); ++i) {
    const Event& e = scan.events[i];
    try {
      apply_event(states[e.user_id], e, options_.registry, options_.config);
    } catch (const Error& err) {
      // The live path only logs events that applied cleanly, so this entry
      // was damaged or written against a different registry.
      report_.corrupt_at = scan.offsets[i];
      report_.reason = err.what();
      break;
    }
    last_seq = e.seq;
    ++report_.events_applied;
  }
  if (!report_.corrupt_at && scan.corrupt_at) {
    report_.corrupt_at = scan.corrupt_at;
    report_.reason = scan.reason;
  }

  for (auto& [id, state] : states) {
    if (!state) continue;
    auto slot = std::make_unique<Slot>();
    slot->state = std::move(*state);
    users_.emplace(id, std::move(slot));
  }

  if (options_.read_only) return;
  if (report_.corrupt_at) report_.backup = quarantine_tail(path, *report_.corrupt_at);
  log_ = std::make_unique<EventLog>(path, last_seq, options_.sync);
}

Service::Slot& Service::slot(const std::string& user_id) const {
  std::shared_lock lock(users_mu_);
  const auto it = users_.find(user_id);
  if (it == users_.end()) throw Error(Errc::UnknownUser, "no user '" + user_id + "'");
  return *it->second;
}

// Caller holds the slot's exclusive lock.
nlohmann::json Service::commit(Slot& slot, Event event) {
  if (!log_) throw Error(Errc::InvalidArgument, "service is read-only");
  std::optional<UserState> next = slot.state;
  nlohmann::json body = apply_event(next, event, options_.registry, options_.config);
  log_->append(event);
  slot.state = std::move(*next);
  return body;
}

nlohmann::json Service::create_user(const std::string& user_id, const ConfigOverrides& overrides) {
  if (!log_) throw Error(Errc::InvalidArgument, "service is read-only");
  std::unique_lock lock(users_mu_);
  if (users_.count(user_id)) throw Error(Errc::UserExists, "user '" + user_id + "' already exists");
  Event event{0, EventType::ProfileCreated, user_id, {{"overrides", overrides.to_json()}}};
  std::optional<UserState> state;
  nlohmann::json body = apply_event(state, event, options_.registry, options_.config);
  log_->append(event);
  auto slot = std::make_unique<Slot>();
  slot->state = std::move(*state);
  users_.emplace(user_id, std::move(slot));
  return body;
}

CheckInAck Service::handle_checkin(const std::string& user_id, const CheckIn& checkin,
                                   const std::optional<std::string>& idempotency_key) {
  Slot& s = slot(user_id);
  std::unique_lock lock(s.mu);
  nlohmann::json doc = checkin_to_json(checkin);
  if (idempotency_key) {
    if (const auto it = s.state.acks.find(*idempotency_key); it != s.state.acks.end()) {
      if (it->second.at("at") != doc.at("at") || it->second.at("emotion") != doc.at("emotion")) {
        throw Error(Errc::InvalidArgument, "idempotency key reused for a different check-in");
      }
      return {it->second, true};
    }
  }
  nlohmann::json data = {{"checkin", std::move(doc)}};
  if (idempotency_key) data["idempotency_key"] = *idempotency_key;
  return {commit(s, Event{0, EventType::CheckInRecorded, user_id, std::move(data)}), false};
}

Prediction Service::handle_predict(const std::string& user_id, const EnvSnapshot& snapshot) const {
  const EnvSnapshot checked = validate_snapshot(snapshot, options_.registry);
  const Slot& s = slot(user_id);
  std::shared_lock lock(s.mu);
  return predict(s.state.profile, checked, options_.registry,
                 s.state.profile.overrides.apply(options_.config));
}

Prediction Service::handle_predict_auto(const std::string& user_id, Timestamp at) const {
  const Slot& s = slot(user_id);
  std::shared_lock lock(s.mu);
  const EnvSnapshot snapshot = snapshot_at(s.state.sources, at, options_.registry);
  return predict(s.state.profile, snapshot, options_.registry,
                 s.state.profile.overrides.apply(options_.config));
}

PersonalWeights Service::weights(const std::string& user_id) const {
  const Slot& s = slot(user_id);
  std::shared_lock lock(s.mu);
  return s.state.profile.weights;
}

EngineConfig Service::effective_config(const std::string& user_id) const {
  const Slot& s = slot(user_id);
  std::shared_lock lock(s.mu);
  return s.state.profile.overrides.apply(options_.config);
}

std::size_t Service::upload_sources(const std::string& user_id, SourceGroup group,
                                    const std::vector<SourceRecord>& records) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& r : records) list.push_back(record_to_json(r));
  Slot& s = slot(user_id);
  std::unique_lock lock(s.mu);
  commit(s, Event{0, EventType::SourcesUploaded, user_id,
                  {{"group", to_string(group)}, {"records", std::move(list)}}});
  return records.size();
}

nlohmann::json Service::set_config(const std::string& user_id, const ConfigOverrides& overrides) {
  Slot& s = slot(user_id);
  std::unique_lock lock(s.mu);
  return commit(s, Event{0, EventType::ConfigChanged, user_id, {{"overrides", overrides.to_json()}}});
}

std::vector<std::string> Service::user_ids() const {
  std::shared_lock lock(users_mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : users_) ids.push_back(id);
  return ids;
}

std::map<std::string, UserState> Service::snapshot() const {
  std::shared_lock lock(users_mu_);
  std::map<std::string, UserState> out;
  for (const auto& [id, s] : users_) {
    std::shared_lock user_lock(s->mu);
    out.emplace(id, s->state);
  }
  return out;
}

}  // namespace mspsc
