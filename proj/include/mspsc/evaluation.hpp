#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mspsc/predictor.hpp"
#include "mspsc/wire.hpp"

namespace mspsc {

enum class UserSegment { consistent, inconsistent };
std::string_view to_string(UserSegment segment) noexcept;

// consistent: some run of 7 consecutive UTC days with >= 2 check-ins each.
// inconsistent: at most one check-in per day and no two check-in days adjacent.
// Anyone else is consistent if some day has >= 2 check-ins, else inconsistent.
UserSegment segment_user(std::span<const CheckIn> history);

// A predictor under replay. One instance serves one user's history.
class Model {
 public:
  virtual ~Model() = default;
  // `past` holds exactly the check-ins strictly before the row being predicted.
  virtual Prediction predict(std::span<const CheckIn> past, const EnvSnapshot& snapshot) = 0;
  // Called after scoring, with the row's ground truth.
  virtual void observe(std::span<const CheckIn> past, const CheckIn& revealed) {
    (void)past;
    (void)revealed;
  }
};

using ModelFactory = std::function<std::unique_ptr<Model>(const std::string& user_id)>;

// Models selectable by name: mspsc, frequency, knn, linreg.
ModelFactory make_model_factory(std::string_view name, const FactorRegistry& registry,
                                const EngineConfig& config, std::size_t knn_k = 5);

struct RowOutcome {
  std::string user_id;
  std::size_t row = 0;
  GridIndex actual;
  Prediction prediction;
  bool correct = false;      // any presented candidate within eps
  bool top_correct = false;  // first candidate within eps
  double delta_energy = 0.0;    // against the closest candidate
  double delta_attitude = 0.0;
};

struct EvalOptions {
  double eps = kDefaultTolerance;
  std::string segment = "all";  // all | consistent | inconsistent
  // Rows before this index are fed to the model but not scored. Row 0 has no
  // history and is never scored.
  std::size_t warmup_rows = 1;
};

struct UserBreakdown {
  std::string user_id;
  UserSegment segment = UserSegment::inconsistent;
  std::size_t rows = 0;
  std::size_t n_correct = 0;
};

struct EvalReport {
  std::string model;
  std::string segment = "all";
  std::size_t total_rows = 0;
  std::size_t n_correct = 0;
  double pct_correct = 0.0;
  std::size_t n_top_correct = 0;
  double pct_top_correct = 0.0;
  double avg_candidates_per_row = 0.0;
  double avg_delta_energy = 0.0;
  double avg_delta_attitude = 0.0;
  std::vector<UserBreakdown> users;

  nlohmann::json to_json() const;
};

// Closest candidate by max-axis distance (first on ties).
Candidate closest_candidate(const Prediction& prediction, GridIndex actual);

// Time-ordered replay of one history: each scored row is predicted from the
// strictly earlier rows only, then revealed to the model.
std::vector<RowOutcome> replay_user(std::span<const CheckIn> history, Model& model,
                                    const EvalOptions& options);

EvalReport summarize(std::span<const RowOutcome> rows, std::string model, std::string segment);

EvalReport evaluate(const Dataset& dataset, const ModelFactory& factory, const EvalOptions& options,
                    std::string model_name = "model",
                    std::vector<RowOutcome>* rows_out = nullptr);

}  // namespace mspsc
