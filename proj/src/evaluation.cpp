#include "mspsc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mspsc/baselines.hpp"
#include "mspsc/error.hpp"
#include "mspsc/personalization.hpp"

namespace mspsc {
namespace {

class MspscModel final : public Model {
 public:
  MspscModel(std::string user_id, std::shared_ptr<const FactorRegistry> registry, const EngineConfig& config)
      : registry_(std::move(registry)), config_(config),
        profile_(make_profile(std::move(user_id), *registry_, config)) {}

  Prediction predict(std::span<const CheckIn> past, const EnvSnapshot& snapshot) override {
    if (past.size() != profile_.history.size()) {
      throw Error(Errc::InvalidArgument, "replay out of sync with the profile");
    }
    return mspsc::predict(profile_, snapshot, *registry_, config_);
  }

  void observe(std::span<const CheckIn>, const CheckIn& revealed) override {
    process_feedback(profile_, revealed, *registry_, config_);
  }

 private:
  std::shared_ptr<const FactorRegistry> registry_;
  EngineConfig config_;
  UserProfile profile_;
};

class FrequencyModel final : public Model {
 public:
  Prediction predict(std::span<const CheckIn> past, const EnvSnapshot& snapshot) override {
    Prediction p = baseline_frequency(past);
    p.generated_at = snapshot.captured_at;
    return p;
  }
};

class KnnModel final : public Model {
 public:
  KnnModel(std::shared_ptr<const FactorRegistry> registry, std::size_t k)
      : registry_(std::move(registry)), k_(k) {}
  Prediction predict(std::span<const CheckIn> past, const EnvSnapshot& snapshot) override {
    return baseline_knn(past, snapshot, *registry_, k_);
  }

 private:
  std::shared_ptr<const FactorRegistry> registry_;
  std::size_t k_;
};

// Falls back to the modal emotion while the regression is under-determined.
class LinregModel final : public Model {
 public:
  explicit LinregModel(std::shared_ptr<const FactorRegistry> registry)
      : registry_(std::move(registry)) {}
  Prediction predict(std::span<const CheckIn> past, const EnvSnapshot& snapshot) override {
    try {
      return baseline_linreg(past, snapshot, *registry_);
    } catch (const Error& e) {
      if (e.code() != Errc::InsufficientData) throw;
      Prediction p = baseline_frequency(past);
      p.generated_at = snapshot.captured_at;
      p.fallback = true;
      return p;
    }
  }

 private:
  std::shared_ptr<const FactorRegistry> registry_;
};

}  // namespace

std::string_view to_string(UserSegment segment) noexcept {
  return segment == UserSegment::consistent ? "consistent" : "inconsistent";
}

UserSegment segment_user(std::span<const CheckIn> history) {
  std::map<std::int64_t, std::size_t> per_day;
  for (const auto& c : history) ++per_day[day_number(c.at)];

  std::int64_t run = 0;
  std::int64_t prev_day = 0;
  bool have_prev = false;
  for (const auto& [day, count] : per_day) {
    if (count >= 2) {
      run = (have_prev && day == prev_day + 1 && run > 0) ? run + 1 : 1;
      if (run >= 7) return UserSegment::consistent;
    } else {
      run = 0;
    }
    prev_day = day;
    have_prev = true;
  }

  bool strictly_sparse = true;
  std::int64_t last = 0;
  bool first = true;
  for (const auto& [day, count] : per_day) {
    if (count > 1 || (!first && day == last + 1)) {
      strictly_sparse = false;
      break;
    }
    last = day;
    first = false;
  }
  if (strictly_sparse) return UserSegment::inconsistent;

  const bool any_double_day = std::any_of(per_day.begin(), per_day.end(),
                                          [](const auto& kv) { return kv.second >= 2; });
  return any_double_day ? UserSegment::consistent : UserSegment::inconsistent;
}

ModelFactory make_model_factory(std::string_view name, const FactorRegistry& registry,
                                const EngineConfig& config, std::size_t knn_k) {
  config.validate();
  auto shared = std::make_shared<const FactorRegistry>(registry);
  if (name == "mspsc") {
    return [shared, config](const std::string& user) {
      return std::make_unique<MspscModel>(user, shared, config);
    };
  }
  if (name == "frequency") {
    return [](const std::string&) { return std::make_unique<FrequencyModel>(); };
  }
  if (name == "knn") {
    if (knn_k == 0) throw Error(Errc::InvalidArgument, "knn k must be positive");
    return [shared, knn_k](const std::string&) {
      return std::make_unique<KnnModel>(shared, knn_k);
    };
  }
  if (name == "linreg") {
    return [shared](const std::string&) { return std::make_unique<LinregModel>(shared); };
  }
  throw Error(Errc::InvalidArgument, "unknown model '" + std::string(name) + "'");
}

Candidate closest_candidate(const Prediction& prediction, GridIndex actual) {
  if (prediction.candidates.empty()) throw Error(Errc::InvalidArgument, "prediction has no candidates");
  const EmotionPoint target = grid_center(actual);
  const Candidate* best = &prediction.candidates.front();
  double best_dist = max_axis_distance(grid_center(best->cell), target);
  for (const auto& c : prediction.candidates) {
    const double d = max_axis_distance(grid_center(c.cell), target);
    if (d < best_dist) {
      best = &c;
      best_dist = d;
    }
  }
  return *best;
}

std::vector<RowOutcome> replay_user(std::span<const CheckIn> history, Model& model,
                                    const EvalOptions& options) {
  std::vector<RowOutcome> rows;
  const std::size_t first_scored = std::max<std::size_t>(options.warmup_rows, 1);
  for (std::size_t t = 0; t < history.size(); ++t) {
    const auto past = history.first(t);
    const CheckIn& row = history[t];
    if (t >= first_scored) {
      RowOutcome outcome;
      outcome.user_id = row.user_id;
      outcome.row = t;
      outcome.actual = row.emotion;
      outcome.prediction = model.predict(past, row.env);
      if (outcome.prediction.candidates.empty()) {
        throw Error(Errc::InvalidArgument, "model returned no candidates");
      }
      const EmotionPoint actual = grid_center(row.emotion);
      outcome.correct = std::any_of(
          outcome.prediction.candidates.begin(), outcome.prediction.candidates.end(),
          [&](const Candidate& c) { return within_tolerance(grid_center(c.cell), actual, options.eps); });
      outcome.top_correct =
          within_tolerance(grid_center(outcome.prediction.top()), actual, options.eps);
      const EmotionPoint closest = grid_center(closest_candidate(outcome.prediction, row.emotion).cell);
      outcome.delta_energy = std::abs(closest.energy - actual.energy);
      outcome.delta_attitude = std::abs(closest.attitude - actual.attitude);
      rows.push_back(std::move(outcome));
    }
    model.observe(past, row);
  }
  return rows;
}

EvalReport summarize(std::span<const RowOutcome> rows, std::string model, std::string segment) {
  EvalReport report;
  report.model = std::move(model);
  report.segment = std::move(segment);
  report.total_rows = rows.size();
  double candidates = 0.0;
  double de = 0.0;
  double da = 0.0;
  std::map<std::string, UserBreakdown> users;
  for (const auto& r : rows) {
    report.n_correct += r.correct ? 1 : 0;
    report.n_top_correct += r.top_correct ? 1 : 0;
    candidates += static_cast<double>(r.prediction.candidates.size());
    de += r.delta_energy;
    da += r.delta_attitude;
    auto& u = users[r.user_id];
    u.user_id = r.user_id;
    ++u.rows;
    u.n_correct += r.correct ? 1 : 0;
  }
  if (!rows.empty()) {
    const double n = static_cast<double>(rows.size());
    report.pct_correct = 100.0 * static_cast<double>(report.n_correct) / n;
    report.pct_top_correct = 100.0 * static_cast<double>(report.n_top_correct) / n;
    report.avg_candidates_per_row = candidates / n;
    report.avg_delta_energy = de / n;
    report.avg_delta_attitude = da / n;
  }
  for (auto& [id, u] : users) report.users.push_back(std::move(u));
  return report;
}

EvalReport evaluate(const Dataset& dataset, const ModelFactory& factory, const EvalOptions& options,
                    std::string model_name, std::vector<RowOutcome>* rows_out) {
  if (options.segment != "all" && options.segment != "consistent" &&
      options.segment != "inconsistent") {
    throw Error(Errc::InvalidArgument, "segment must be all, consistent or inconsistent");
  }
  std::vector<RowOutcome> rows;
  std::map<std::string, UserSegment> labels;
  for (const auto& [user_id, history] : dataset) {
    const UserSegment label = segment_user(history);
    labels[user_id] = label;
    if (options.segment != "all" && options.segment != to_string(label)) continue;
    auto model = factory(user_id);
    auto user_rows = replay_user(history, *model, options);
    std::move(user_rows.begin(), user_rows.end(), std::back_inserter(rows));
  }
  EvalReport report = summarize(rows, std::move(model_name), options.segment);
  for (auto& u : report.users) u.segment = labels.at(u.user_id);
  if (rows_out != nullptr) *rows_out = std::move(rows);
  return report;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json per_user = nlohmann::json::array();
  for (const auto& u : users) {
    per_user.push_back({{"user_id", u.user_id},
                        {"segment", to_string(u.segment)},
                        {"rows", u.rows},
                        {"n_correct", u.n_correct},
                        {"pct_correct", u.rows ? 100.0 * static_cast<double>(u.n_correct) /
                                                     static_cast<double>(u.rows)
                                               : 0.0}});
  }
  return {{"model", model},
          {"segment", segment},
          {"total_rows", total_rows},
          {"pct_correct", pct_correct},
          {"n_correct", n_correct},
          {"avg_candidates_per_row", avg_candidates_per_row},
          {"avg_delta_energy", avg_delta_energy},
          {"avg_delta_attitude", avg_delta_attitude},
          {"pct_top_correct", pct_top_correct},
          {"users", std::move(per_user)}};
}

}  // namespace mspsc
