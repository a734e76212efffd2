#include "mspsc/http_server.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

#include "mspsc/error.hpp"
#include "mspsc/wire.hpp"

namespace mspsc {
namespace {

constexpr const char* kJson = "application/json";
constexpr const char* kUserPath = "/v1/users/([A-Za-z0-9._-]+)";

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, http_status(e.code()), to_string(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, to_string(Errc::ParseError), e.what());
  } catch (const std::exception& e) {
    spdlog::error("unhandled: {}", e.what());
    send_error(res, 500, "Internal", e.what());
  }
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::ParseError, std::string("request body: ") + e.what());
  }
}

bool content_type_is(const httplib::Request& req, std::string_view type) {
  const std::string value = req.get_header_value("Content-Type");
  return value.compare(0, type.size(), type) == 0;
}

Timestamp now_seconds() {
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

}  // namespace

int http_status(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownUser: return 404;
    case Errc::OutOfOrderCheckIn:
    case Errc::UserExists: return 409;
    case Errc::NoHistoryFallbackImpossible: return 422;
    case Errc::CorruptLogEntry:
    case Errc::IoError: return 500;
    default: return 400;
  }
}

void register_routes(httplib::Server& server, Service& service, const HttpOptions& options) {
  const std::string token = options.auth_token;
  server.set_pre_routing_handler([token](const httplib::Request& req, httplib::Response& res) {
    if (token.empty() || req.path == "/v1/health") return httplib::Server::HandlerResponse::Unhandled;
    if (req.get_header_value("Authorization") != "Bearer " + token) {
      send_error(res, 401, "Unauthorized", "missing or wrong bearer token");
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });
  server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
  });

  server.Get("/v1/health", [&service](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}, {"users", service.user_ids().size()}});
  });

  server.Post("/v1/users", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const nlohmann::json body = parse_body(req);
      const auto overrides = body.contains("config") ? ConfigOverrides::from_json(body.at("config"))
                                                     : ConfigOverrides{};
      send_json(res, 201, service.create_user(body.at("user_id").get<std::string>(), overrides));
    });
  });

  server.Post(std::string(kUserPath) + "/checkins",
              [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string user = req.matches[1];
      nlohmann::json body = parse_body(req);
      if (!body.contains("user_id")) body["user_id"] = user;
      const CheckIn checkin = checkin_from_json(body);
      std::optional<std::string> key;
      if (req.has_header("Idempotency-Key")) key = req.get_header_value("Idempotency-Key");
      const CheckInAck ack = service.handle_checkin(user, checkin, key);
      if (ack.replayed) res.set_header("Idempotent-Replayed", "true");
      send_json(res, 201, ack.body);
    });
  });

  server.Get(std::string(kUserPath) + "/prediction",
             [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string user = req.matches[1];
      const std::string mode = req.has_param("snapshot") ? req.get_param_value("snapshot") : "auto";
      Prediction prediction;
      if (mode == "auto") {
        const Timestamp at = req.has_param("at") ? parse_rfc3339(req.get_param_value("at"))
                                                 : now_seconds();
        prediction = service.handle_predict_auto(user, at);
      } else {
        EnvSnapshot snapshot;
        try {
          snapshot = snapshot_from_json(nlohmann::json::parse(mode));
        } catch (const nlohmann::json::parse_error& e) {
          throw Error(Errc::ParseError, std::string("snapshot must be 'auto' or a JSON document: ") + e.what());
        }
        prediction = service.handle_predict(user, snapshot);
      }
      nlohmann::json body = prediction.to_json();
      body["user_id"] = user;
      send_json(res, 200, body);
    });
  });

  server.Get(std::string(kUserPath) + "/weights",
             [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string user = req.matches[1];
      nlohmann::json body = service.weights(user).to_json();
      body["user_id"] = user;
      send_json(res, 200, body);
    });
  });

  server.Post(std::string(kUserPath) + "/sources/([a-z]+)",
              [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string user = req.matches[1];
      const SourceGroup group = parse_source_group(req.matches[2].str());
      std::vector<SourceRecord> records;
      std::vector<RowReject> rejects;
      if (content_type_is(req, "text/calendar")) {
        if (group != SourceGroup::calendar) {
          throw Error(Errc::InvalidArgument, "iCalendar uploads go to the calendar group");
        }
        records = parse_calendar_events(req.body);
      } else if (content_type_is(req, "text/csv")) {
        TableParse parsed;
        if (group == SourceGroup::weather) {
          parsed = parse_weather_table(req.body);
        } else if (group == SourceGroup::fitness) {
          parsed = parse_fitness_table(req.body);
        } else {
          throw Error(Errc::InvalidArgument, "calendar uploads must be iCalendar or JSON");
        }
        records = std::move(parsed.records);
        rejects = std::move(parsed.rejects);
      } else {
        nlohmann::json body = parse_body(req);
        if (body.is_object() && body.contains("records")) body = body.at("records");
        if (!body.is_array()) throw Error(Errc::InvalidArgument, "expected an array of source records");
        for (auto& item : body) {
          if (!item.contains("group")) item["group"] = to_string(group);
          records.push_back(record_from_json(item));
        }
      }
      service.upload_sources(user, group, records);
      nlohmann::json rejected = nlohmann::json::array();
      for (const auto& r : rejects) rejected.push_back({{"line", r.line}, {"reason", r.reason}});
      send_json(res, 201, {{"user_id", user},
                           {"group", to_string(group)},
                           {"accepted", records.size()},
                           {"rejects", rejected}});
    });
  });

  server.Post(std::string(kUserPath) + "/config",
              [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string user = req.matches[1];
      send_json(res, 200, service.set_config(user, ConfigOverrides::from_json(parse_body(req))));
    });
  });
}

}  // namespace mspsc
