#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "srm/choice_model.hpp"
#include "srm/metrics.hpp"
#include "srm/mlp.hpp"
#include "srm/residuals.hpp"

namespace srm {

struct SessionConfig {
  std::uint64_t seed = 0;
  FitConfig fit;
  MlpTrainConfig mlp;
  // Share of the training dilemmas held out for the network's early stopping.
  double validation_fraction = 0.1;
  int min_n = 100;
  std::size_t top_k = 5;
  double stop_epsilon = 0.002;
};

nlohmann::ordered_json to_json(const SessionConfig& cfg);
SessionConfig session_config_from_json(const nlohmann::json& j);

struct IterationReport {
  int index = 0;
  std::vector<std::string> added;
  std::string feature_hash;
  bool reference_retrained = false;
  MetricReport choice;
  MetricReport reference;
  std::vector<ResidualRecord> smoothed;
  std::vector<ResidualRecord> raw;
  std::vector<std::string> warnings;

  bool operator==(const IterationReport&) const = default;
};

nlohmann::ordered_json to_json(const IterationReport& r);
IterationReport iteration_report_from_json(const nlohmann::json& j);

enum class SessionStatus { Idle, Fitting, Done };
std::string_view status_name(SessionStatus s);

// One analyst session: a fixed dataset and split, a growing feature set, the
// refitted choice model, the reference network and the per-iteration history.
// Metrics are measured on the held-out split; residual tables span the whole
// dataset.
class Session {
 public:
  // Splits the data, fits the choice model on the base features and trains the
  // reference network on the training split (minus a validation carve-out).
  static Session create(std::vector<AggregatedJudgment> data, std::string base_feature_text,
                        SessionConfig cfg, const ProgressFn& progress = {});

  // Appends the features in `feature_text` (possibly empty), refits the choice
  // model from scratch on the same split and appends a report to the history.
  // Throws ParseError for malformed text or name collisions.
  const IterationReport& iterate(std::string_view feature_text, bool retrain_reference = false,
                                 const ProgressFn& progress = {});

  // |accuracy gap| <= epsilon and |AUC gap| <= 2 epsilon on the latest report.
  bool stopping_check(double epsilon) const;

  const std::vector<AggregatedJudgment>& data() const { return data_; }
  const Split& split() const { return split_; }
  const FeatureSet& features() const { return features_; }
  const ChoiceModel& choice() const { return choice_; }
  const Mlp& reference() const { return reference_; }
  const SessionConfig& config() const { return cfg_; }
  const std::vector<IterationReport>& history() const { return history_; }
  SessionStatus status() const { return status_; }
  const AggregatedJudgment* find(std::string_view id) const;

  // Ranked residuals over the whole dataset.
  std::vector<ResidualRecord> residuals(bool smoothed, std::size_t top_k, int min_n) const;

  // manifest.json, data.jsonl, checkpoints/, iterations/<k>/{report.json,raw.csv,smoothed.csv}
  void save(const std::filesystem::path& dir) const;
  // Restores a saved session without refitting.
  static Session load(const std::filesystem::path& dir);
  // Rebuilds a session from its manifest and data by re-running every step.
  static Session replay(const std::filesystem::path& dir, const ProgressFn& progress = {});

  nlohmann::ordered_json manifest() const;
  // Summary for clients: status, features, config and the iteration history.
  nlohmann::ordered_json state_json() const;

 private:
  Session() = default;
  void train_reference(const ProgressFn& progress);
  IterationReport make_report(int index, std::vector<std::string> added,
                              std::vector<std::string> warnings, bool retrained) const;

  std::vector<AggregatedJudgment> data_;
  Split split_;
  SessionConfig cfg_;
  std::string base_text_;
  struct Step {
    std::string text;
    bool retrain_reference = false;
  };
  std::vector<Step> steps_;
  FeatureSet features_;
  ChoiceModel choice_;
  Mlp reference_;
  std::vector<double> p_choice_;
  std::vector<double> p_reference_;
  std::vector<IterationReport> history_;
  SessionStatus status_ = SessionStatus::Idle;
};

}  // namespace srm

namespace srm {

nlohmann::ordered_json to_json(const FitConfig& cfg);
FitConfig fit_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const MlpTrainConfig& cfg);
MlpTrainConfig mlp_train_config_from_json(const nlohmann::json& j);

}  // namespace srm
