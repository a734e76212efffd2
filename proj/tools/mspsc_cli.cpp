// mspsc: serve | simulate | eval | predict
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "mspsc/error.hpp"
#include "mspsc/evaluation.hpp"
#include "mspsc/http_server.hpp"
#include "mspsc/simulator.hpp"
#include "mspsc/wire.hpp"

namespace {

std::atomic<httplib::Server*> g_server{nullptr};

void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

mspsc::FactorRegistry load_registry(const std::string& path) {
  return path.empty() ? mspsc::default_registry() : mspsc::FactorRegistry::load(path);
}

void write_output(const std::string& path, const nlohmann::json& doc) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw mspsc::Error(mspsc::Errc::IoError, "cannot write " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::from_str(env_or("LOG_LEVEL", "info")));

  CLI::App app{"Mood shift predictor: engine, service, simulator and evaluation harness"};
  app.require_subcommand(1);

  std::string registry_path;
  app.add_option("--registry", registry_path, "factor registry JSON (default: built-in nine factors)");

  mspsc::EngineConfig config;
  auto add_engine_options = [&config](CLI::App* cmd) {
    cmd->add_option("--k", config.k, "cluster size per factor")->capture_default_str();
    cmd->add_option("--theta", config.theta, "keep candidates >= theta * best")->capture_default_str();
    cmd->add_option("--n-max", config.n_max, "maximum candidates")->capture_default_str();
  };

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  std::string addr = "127.0.0.1:8080";
  std::string store = env_or("STORE_PATH", "./store");
  serve->add_option("--addr", addr, "host:port to listen on")->capture_default_str();
  serve->add_option("--store", store, "store directory (env STORE_PATH)")->capture_default_str();
  add_engine_options(serve);

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic check-in dataset");
  std::string scenario_path, dataset_out;
  simulate->add_option("--scenario", scenario_path, "scenario JSON")->required();
  simulate->add_option("--out", dataset_out, "dataset path (JSONL)")->required();

  auto* eval = app.add_subcommand("eval", "replay a dataset through a model");
  std::string dataset_path, model = "mspsc", segment = "all", report_out;
  std::size_t knn_k = 5;
  eval->add_option("--dataset", dataset_path, "dataset path (JSONL)")->required();
  eval->add_option("--model", model, "model")
      ->check(CLI::IsMember({"mspsc", "frequency", "knn", "linreg"}))
      ->capture_default_str();
  eval->add_option("--eps", config.eps, "per-axis tolerance")->capture_default_str();
  eval->add_option("--segment", segment, "user segment")
      ->check(CLI::IsMember({"all", "consistent", "inconsistent"}))
      ->capture_default_str();
  eval->add_option("--knn-k", knn_k, "neighbours for the knn baseline")->capture_default_str();
  eval->add_option("--out", report_out, "report path (default stdout)");
  add_engine_options(eval);

  auto* predict_cmd = app.add_subcommand("predict", "predict for a stored user");
  std::string user, snapshot_file;
  predict_cmd->add_option("--user", user, "user id")->required();
  predict_cmd->add_option("--snapshot-file", snapshot_file, "snapshot JSON")->required();
  predict_cmd->add_option("--store", store, "store directory (env STORE_PATH)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    const mspsc::FactorRegistry registry = load_registry(registry_path);

    if (*serve) {
      const auto colon = addr.rfind(':');
      if (colon == std::string::npos) throw mspsc::Error(mspsc::Errc::InvalidArgument, "--addr needs host:port");
      const std::string host = addr.substr(0, colon);
      const int port = std::stoi(addr.substr(colon + 1));

      mspsc::Service service({store, registry, config});
      const auto& report = service.rebuild_report();
      spdlog::info("rebuilt {} events, {} users from {}", report.events_applied,
                   service.user_ids().size(), mspsc::log_path(store).string());
      if (report.corrupt_at) {
        spdlog::warn("log damaged at offset {} ({}); copy kept at {}", *report.corrupt_at,
                     report.reason, report.backup.string());
      }
      const std::string token = env_or("AUTH_TOKEN", "");
      if (token.empty()) spdlog::warn("AUTH_TOKEN unset, requests are not authenticated");

      httplib::Server server;
      mspsc::register_routes(server, service, {token});
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      spdlog::info("listening on {}:{}", host, port);
      if (!server.listen(host, port)) {
        spdlog::error("cannot listen on {}", addr);
        return 1;
      }
      return 0;
    }

    if (*simulate) {
      const mspsc::Scenario scenario = mspsc::Scenario::load(scenario_path);
      const mspsc::Dataset dataset = mspsc::generate_dataset(scenario);
      mspsc::write_dataset(std::filesystem::path(dataset_out), dataset);
      std::size_t rows = 0;
      for (const auto& [_, h] : dataset) rows += h.size();
      spdlog::info("wrote {} check-ins for {} users to {}", rows, dataset.size(), dataset_out);
      return 0;
    }

    if (*eval) {
      config.validate();
      const mspsc::Dataset dataset = mspsc::read_dataset(std::filesystem::path(dataset_path));
      mspsc::EvalOptions options;
      options.eps = config.eps;
      options.segment = segment;
      const auto factory = mspsc::make_model_factory(model, registry, config, knn_k);
      const mspsc::EvalReport report = mspsc::evaluate(dataset, factory, options, model);
      write_output(report_out, report.to_json());
      return 0;
    }

    if (*predict_cmd) {
      mspsc::ServiceOptions options{store, registry, config};
      options.read_only = true;
      const mspsc::Service service(options);
      std::ifstream in(snapshot_file);
      if (!in) throw mspsc::Error(mspsc::Errc::IoError, "cannot read " + snapshot_file);
      const auto snapshot = mspsc::snapshot_from_json(nlohmann::json::parse(in));
      write_output("-", service.handle_predict(user, snapshot).to_json());
      return 0;
    }
  } catch (const mspsc::Error& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
