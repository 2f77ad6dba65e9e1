#include "srm/session.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "srm/checkpoint.hpp"
#include "srm/dataset_io.hpp"
#include "srm/error.hpp"
#include "srm/synth.hpp"

namespace srm {

namespace fs = std::filesystem;

nlohmann::ordered_json to_json(const FitConfig& cfg) {
  nlohmann::ordered_json j;
  j["step_size"] = cfg.step_size;
  j["max_epochs"] = cfg.max_epochs;
  j["tolerance"] = cfg.tolerance;
  j["l2_penalty"] = cfg.l2_penalty;
  j["method"] = cfg.method == FitMethod::Newton ? "newton" : "gradient_descent";
  return j;
}

FitConfig fit_config_from_json(const nlohmann::json& j) {
  require_known_keys(j, {"step_size", "max_epochs", "tolerance", "l2_penalty", "method"}, "fit config");
  FitConfig cfg;
  std::string method;
  try {
    cfg.step_size = j.value("step_size", cfg.step_size);
    cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
    cfg.tolerance = j.value("tolerance", cfg.tolerance);
    cfg.l2_penalty = j.value("l2_penalty", cfg.l2_penalty);
    method = j.value("method", std::string("newton"));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("fit config: ") + e.what());
  }
  if (method == "newton") {
    cfg.method = FitMethod::Newton;
  } else if (method == "gradient_descent") {
    cfg.method = FitMethod::GradientDescent;
  } else {
    throw ConfigError("unknown fit method '" + method + "'");
  }
  return cfg;
}

nlohmann::ordered_json to_json(const MlpTrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["hidden_layers"] = cfg.hidden_layers;
  j["learning_rate"] = cfg.learning_rate;
  j["beta1"] = cfg.beta1;
  j["beta2"] = cfg.beta2;
  j["epsilon"] = cfg.epsilon;
  j["batch_size"] = cfg.batch_size;
  j["max_epochs"] = cfg.max_epochs;
  j["patience"] = cfg.patience;
  j["validation_fraction"] = cfg.validation_fraction;
  j["axis_inputs"] = cfg.axis_inputs;
  j["seed"] = cfg.seed;
  return j;
}

MlpTrainConfig mlp_train_config_from_json(const nlohmann::json& j) {
  require_known_keys(j,
                     {"hidden_layers", "learning_rate", "beta1", "beta2", "epsilon", "batch_size",
                      "max_epochs", "patience", "validation_fraction", "axis_inputs", "seed"},
                     "network config");
  MlpTrainConfig cfg;
  try {
    cfg.hidden_layers = j.value("hidden_layers", cfg.hidden_layers);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.beta1 = j.value("beta1", cfg.beta1);
    cfg.beta2 = j.value("beta2", cfg.beta2);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
    cfg.patience = j.value("patience", cfg.patience);
    cfg.validation_fraction = j.value("validation_fraction", cfg.validation_fraction);
    cfg.axis_inputs = j.value("axis_inputs", cfg.axis_inputs);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("network config: ") + e.what());
  }
  return cfg;
}

nlohmann::ordered_json to_json(const SessionConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["fit"] = to_json(cfg.fit);
  j["mlp"] = to_json(cfg.mlp);
  j["validation_fraction"] = cfg.validation_fraction;
  j["min_n"] = cfg.min_n;
  j["top_k"] = cfg.top_k;
  j["stop_epsilon"] = cfg.stop_epsilon;
  return j;
}

SessionConfig session_config_from_json(const nlohmann::json& j) {
  require_known_keys(j,
                     {"seed", "fit", "mlp", "validation_fraction", "min_n", "top_k", "stop_epsilon"},
                     "session config");
  SessionConfig cfg;
  try {
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("fit")) cfg.fit = fit_config_from_json(j.at("fit"));
    if (j.contains("mlp")) cfg.mlp = mlp_train_config_from_json(j.at("mlp"));
    cfg.validation_fraction = j.value("validation_fraction", cfg.validation_fraction);
    cfg.min_n = j.value("min_n", cfg.min_n);
    cfg.top_k = j.value("top_k", cfg.top_k);
    cfg.stop_epsilon = j.value("stop_epsilon", cfg.stop_epsilon);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("session config: ") + e.what());
  }
  return cfg;
}

nlohmann::ordered_json to_json(const IterationReport& r) {
  nlohmann::ordered_json j;
  j["index"] = r.index;
  j["added"] = r.added;
  j["feature_hash"] = r.feature_hash;
  j["reference_retrained"] = r.reference_retrained;
  j["choice"] = to_json(r.choice);
  j["reference"] = to_json(r.reference);
  j["warnings"] = r.warnings;
  auto table = [](const std::vector<ResidualRecord>& recs) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& rec : recs) a.push_back(to_json(rec));
    return a;
  };
  j["smoothed"] = table(r.smoothed);
  j["raw"] = table(r.raw);
  return j;
}

IterationReport iteration_report_from_json(const nlohmann::json& j) {
  IterationReport r;
  try {
    r.index = j.at("index").get<int>();
    r.added = j.at("added").get<std::vector<std::string>>();
    r.feature_hash = j.at("feature_hash").get<std::string>();
    r.reference_retrained = j.at("reference_retrained").get<bool>();
    r.choice = metric_report_from_json(j.at("choice"));
    r.reference = metric_report_from_json(j.at("reference"));
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& rec : j.at("smoothed")) r.smoothed.push_back(residual_record_from_json(rec));
    for (const auto& rec : j.at("raw")) r.raw.push_back(residual_record_from_json(rec));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("iteration report: ") + e.what());
  }
  return r;
}

std::string_view status_name(SessionStatus s) {
  switch (s) {
    case SessionStatus::Idle:
      return "idle";
    case SessionStatus::Fitting:
      return "fitting";
    case SessionStatus::Done:
      break;
  }
  return "done";
}

namespace {

std::vector<std::string> referenced_axes(const FeatureSet& features) {
  std::set<std::string> axes;
  auto visit = [&](const FeatureDef& f, auto&& self) -> void {
    for (const auto& atom : f.conjunction) {
      if (!atom.axis.empty()) axes.insert(atom.axis);
    }
    for (const auto& factor : f.factors) self(factor, self);
  };
  for (const auto& f : features) visit(f, visit);
  return {axes.begin(), axes.end()};
}

// Scales a sub-task's progress into [lo, hi] of the caller's range.
ProgressFn sub_progress(const ProgressFn& progress, double lo, double hi) {
  if (!progress) return {};
  return [=](double f) { progress(lo + (hi - lo) * std::clamp(f, 0.0, 1.0)); };
}

}  // namespace

Session Session::create(std::vector<AggregatedJudgment> data, std::string base_feature_text,
                        SessionConfig cfg, const ProgressFn& progress) {
  for (const auto& j : data) validate(j);
  Session s;
  s.data_ = std::move(data);
  s.cfg_ = std::move(cfg);
  s.base_text_ = std::move(base_feature_text);
  s.features_ = parse_feature_spec(s.base_text_);
  s.split_ = binned_split(s.data_, s.cfg_.seed);
  if (s.split_.test.empty()) throw ConfigError("the split produced an empty test set");

  s.status_ = SessionStatus::Fitting;
  FitResult fit = fit_choice_model(s.split_.train, s.features_, s.cfg_.fit);
  s.choice_ = std::move(fit.model);
  s.p_choice_ = predict_all(s.choice_, s.data_);
  if (progress) progress(0.05);
  s.train_reference(sub_progress(progress, 0.05, 0.95));
  s.history_.push_back(s.make_report(0, s.features_.names(), std::move(fit.warnings), true));
  s.status_ = s.stopping_check(s.cfg_.stop_epsilon) ? SessionStatus::Done : SessionStatus::Idle;
  if (progress) progress(1.0);
  return s;
}

void Session::train_reference(const ProgressFn& progress) {
  // The reference sees the configured axes plus any axis the features mention.
  MlpTrainConfig mcfg = cfg_.mlp;
  for (auto& a : referenced_axes(features_)) {
    if (std::ranges::find(mcfg.axis_inputs, a) == mcfg.axis_inputs.end()) mcfg.axis_inputs.push_back(std::move(a));
  }
  mcfg.seed = derive_seed(cfg_.seed, 3);
  reference_ = mlp_train_holdout(split_.train, cfg_.validation_fraction, derive_seed(cfg_.seed, 2),
                                 mcfg, nullptr, progress);
  p_reference_ = predict_all(reference_, data_);
}

IterationReport Session::make_report(int index, std::vector<std::string> added,
                                     std::vector<std::string> warnings, bool retrained) const {
  IterationReport r;
  r.index = index;
  r.added = std::move(added);
  r.feature_hash = features_.hash();
  r.reference_retrained = retrained;
  r.warnings = std::move(warnings);
  r.choice = evaluate(predict_all(choice_, split_.test), split_.test, choice_.num_params());
  r.reference = evaluate(predict_all(reference_, split_.test), split_.test, reference_.num_params());
  r.smoothed = smoothed_residuals(data_, p_choice_, p_reference_, cfg_.top_k);
  r.raw = raw_residuals(data_, p_choice_, p_reference_, cfg_.min_n, cfg_.top_k);
  return r;
}

const IterationReport& Session::iterate(std::string_view feature_text, bool retrain_reference,
                                        const ProgressFn& progress) {
  if (status_ == SessionStatus::Fitting) throw ConfigError("a fit is already running");
  FeatureSet next = extend_feature_set(features_, feature_text);
  std::vector<std::string> added;
  for (std::size_t i = features_.size(); i < next.size(); ++i) added.push_back(next[i].name);

  status_ = SessionStatus::Fitting;
  try {
    FitResult fit = fit_choice_model(split_.train, next, cfg_.fit);
    if (progress) progress(retrain_reference ? 0.05 : 0.5);
    features_ = std::move(next);
    choice_ = std::move(fit.model);
    p_choice_ = predict_all(choice_, data_);
    if (retrain_reference) {
      train_reference(sub_progress(progress, 0.05, 0.95));
    }
    steps_.push_back({std::string(feature_text), retrain_reference});
    history_.push_back(make_report(static_cast<int>(history_.size()), std::move(added),
                                   std::move(fit.warnings), retrain_reference));
  } catch (...) {
    status_ = SessionStatus::Idle;
    throw;
  }
  status_ = stopping_check(cfg_.stop_epsilon) ? SessionStatus::Done : SessionStatus::Idle;
  if (progress) progress(1.0);
  return history_.back();
}

bool Session::stopping_check(double epsilon) const {
  if (history_.empty()) return false;
  const auto& last = history_.back();
  return std::abs(last.choice.accuracy - last.reference.accuracy) <= epsilon &&
         std::abs(last.choice.auc - last.reference.auc) <= 2.0 * epsilon;
}

const AggregatedJudgment* Session::find(std::string_view id) const {
  for (const auto& j : data_) {
    if (j.dilemma.id == id) return &j;
  }
  return nullptr;
}

std::vector<ResidualRecord> Session::residuals(bool smoothed, std::size_t top_k, int min_n) const {
  if (smoothed) return smoothed_residuals(data_, p_choice_, p_reference_, top_k);
  return raw_residuals(data_, p_choice_, p_reference_, min_n, top_k);
}

nlohmann::ordered_json Session::manifest() const {
  nlohmann::ordered_json m;
  m["tool_version"] = SRM_VERSION;
  m["seed"] = cfg_.seed;
  m["config"] = to_json(cfg_);
  m["data"] = "data.jsonl";
  m["base_features"] = base_text_;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : steps_) {
    steps.push_back({{"features", s.text}, {"retrain_reference", s.retrain_reference}});
  }
  m["iterations"] = std::move(steps);
  return m;
}

nlohmann::ordered_json Session::state_json() const {
  nlohmann::ordered_json s;
  s["status"] = std::string(status_name(status_));
  s["n_dilemmas"] = data_.size();
  s["n_train"] = split_.train.size();
  s["n_test"] = split_.test.size();
  s["n_features"] = features_.size();
  s["feature_hash"] = features_.hash();
  s["features"] = features_.to_text();
  s["reference_params"] = reference_.num_params();
  s["config"] = to_json(cfg_);
  auto hist = nlohmann::ordered_json::array();
  for (const auto& r : history_) {
    hist.push_back({{"index", r.index},
                    {"added", r.added},
                    {"feature_hash", r.feature_hash},
                    {"reference_retrained", r.reference_retrained},
                    {"choice", to_json(r.choice)},
                    {"reference", to_json(r.reference)},
                    {"warnings", r.warnings}});
  }
  s["history"] = std::move(hist);
  s["stopping_check"] = stopping_check(cfg_.stop_epsilon);
  return s;
}

void Session::save(const fs::path& dir) const {
  fs::create_directories(dir / "checkpoints");
  fs::create_directories(dir / "iterations");
  write_json_file(dir / "manifest.json", manifest());
  write_dataset(dir / "data.jsonl", data_);
  write_json_file(dir / "checkpoints" / "choice.json", choice_checkpoint(choice_));
  write_json_file(dir / "checkpoints" / "reference.json", mlp_checkpoint(reference_));
  for (const auto& r : history_) {
    const fs::path it = dir / "iterations" / std::to_string(r.index);
    fs::create_directories(it);
    write_json_file(it / "report.json", to_json(r));
    std::ofstream(it / "raw.csv") << residuals_csv(r.raw);
    std::ofstream(it / "smoothed.csv") << residuals_csv(r.smoothed);
  }
}

namespace {

struct ManifestContents {
  SessionConfig cfg;
  std::string base_text;
  std::vector<std::pair<std::string, bool>> steps;
  std::vector<AggregatedJudgment> data;
};

ManifestContents read_manifest(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("session directory '" + dir.string() + "' does not exist");
  const auto m = read_json_file(dir / "manifest.json");
  ManifestContents c;
  try {
    c.cfg = session_config_from_json(m.at("config"));
    c.base_text = m.at("base_features").get<std::string>();
    for (const auto& s : m.at("iterations")) {
      c.steps.emplace_back(s.at("features").get<std::string>(), s.at("retrain_reference").get<bool>());
    }
    c.data = read_dataset(dir / m.at("data").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  return c;
}

}  // namespace

Session Session::load(const fs::path& dir) {
  ManifestContents c = read_manifest(dir);
  Session s;
  s.data_ = std::move(c.data);
  s.cfg_ = std::move(c.cfg);
  s.base_text_ = std::move(c.base_text);
  s.features_ = parse_feature_spec(s.base_text_);
  for (auto& [text, retrain] : c.steps) {
    s.features_ = extend_feature_set(s.features_, text);
    s.steps_.push_back({std::move(text), retrain});
  }
  s.split_ = binned_split(s.data_, s.cfg_.seed);
  s.choice_ = choice_from_checkpoint(read_json_file(dir / "checkpoints" / "choice.json"));
  if (!(s.choice_.feature_set() == s.features_)) {
    throw ParseError("choice checkpoint does not match the manifest's feature history");
  }
  s.reference_ = mlp_from_checkpoint(read_json_file(dir / "checkpoints" / "reference.json"));
  s.p_choice_ = predict_all(s.choice_, s.data_);
  s.p_reference_ = predict_all(s.reference_, s.data_);
  for (std::size_t k = 0; k <= s.steps_.size(); ++k) {
    s.history_.push_back(iteration_report_from_json(
        read_json_file(dir / "iterations" / std::to_string(k) / "report.json")));
  }
  s.status_ = s.stopping_check(s.cfg_.stop_epsilon) ? SessionStatus::Done : SessionStatus::Idle;
  return s;
}

Session Session::replay(const fs::path& dir, const ProgressFn& progress) {
  ManifestContents c = read_manifest(dir);
  const double parts = static_cast<double>(c.steps.size() + 1);
  Session s = create(std::move(c.data), std::move(c.base_text), std::move(c.cfg),
                     sub_progress(progress, 0.0, 1.0 / parts));
  for (std::size_t i = 0; i < c.steps.size(); ++i) {
    s.iterate(c.steps[i].first, c.steps[i].second,
              sub_progress(progress, (i + 1) / parts, (i + 2) / parts));
  }
  return s;
}

}  // namespace srm
