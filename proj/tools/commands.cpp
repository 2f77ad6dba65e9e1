#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <unistd.h>

#include "run_manifest.hpp"
#include "srm/checkpoint.hpp"
#include "srm/choice_model.hpp"
#include "srm/dataset_io.hpp"
#include "srm/error.hpp"
#include "srm/features.hpp"
#include "srm/metrics.hpp"
#include "srm/mlp.hpp"
#include "srm/residuals.hpp"
#include "srm/service.hpp"
#include "srm/session.hpp"
#include "srm/stats.hpp"
#include "srm/sweep.hpp"
#include "srm/synth.hpp"
#include "srm/variational.hpp"

namespace srm::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string read_text_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot open '" + p.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string feature_text_or_hybrid(const std::optional<fs::path>& p) {
  return p ? read_text_file(*p) : hybrid_feature_text();
}

// A checkpoint of either kind reduced to its per-dilemma predictions.
std::vector<double> checkpoint_predictions(const fs::path& p, std::span<const AggregatedJudgment> data) {
  const nlohmann::json j = read_json_file(p);
  const std::string kind = j.value("kind", "");
  if (kind == "choice") return predict_all(choice_from_checkpoint(j), data);
  if (kind == "mlp") return predict_all(mlp_from_checkpoint(j), data);
  throw ParseError(p.string() + ": unknown checkpoint kind '" + kind + "'");
}

// Percent progress on stderr, only when it is a terminal.
ProgressFn terminal_progress() {
  if (!::isatty(STDERR_FILENO)) return {};
  return [last = -1](double f) mutable {
    const int pct = static_cast<int>(100 * f);
    if (pct == last) return;
    last = pct;
    std::cerr << "\rfitting " << pct << "%" << (pct >= 100 ? "\n" : "") << std::flush;
  };
}

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void print_report(std::ostream& out, const IterationReport& r) {
  out << "iteration " << r.index;
  if (r.index == 0) {
    out << " (base, " << r.added.size() << " features)";
  } else if (!r.added.empty()) {
    out << " (+";
    for (std::size_t i = 0; i < r.added.size(); ++i) out << (i ? ", " : " ") << r.added[i];
    out << ")";
  }
  out << "\n  choice     acc " << fmt(r.choice.accuracy) << "  auc " << fmt(r.choice.auc) << "  aic "
      << fmt(r.choice.normalized_aic) << "\n  reference  acc " << fmt(r.reference.accuracy) << "  auc "
      << fmt(r.reference.auc) << "  aic " << fmt(r.reference.normalized_aic) << "\n  gap        acc "
      << fmt(r.reference.accuracy - r.choice.accuracy, "%+.4f") << "  auc "
      << fmt(r.reference.auc - r.choice.auc, "%+.4f") << '\n';
  if (!r.smoothed.empty()) {
    const auto& top = r.smoothed.front();
    out << "  top smoothed residual " << top.id << " (n=" << top.n << ") "
        << fmt(*top.smoothed, "%+.4f") << '\n';
  }
  for (const auto& w : r.warnings) out << "  warning: " << w << '\n';
}

VariationalConfig variational_from_json(const nlohmann::json& j, VariationalConfig cfg) {
  cfg.prior_sd = j.value("prior_sd", cfg.prior_sd);
  cfg.steps = j.value("steps", cfg.steps);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.averaging_fraction = j.value("averaging_fraction", cfg.averaging_fraction);
  cfg.seed = j.value("seed", cfg.seed);
  return cfg;
}

ojson to_json(const VariationalConfig& cfg) {
  return {{"prior_sd", cfg.prior_sd},
          {"steps", cfg.steps},
          {"learning_rate", cfg.learning_rate},
          {"averaging_fraction", cfg.averaging_fraction},
          {"seed", cfg.seed}};
}

}  // namespace

int run_demo_poly(const DemoPolyOptions& o, const ojson& echo) {
  SweepConfig cfg;
  cfg.sizes = o.sizes;
  cfg.sims_per_size = o.sims;
  cfg.seed = o.seed;
  if (o.config) cfg.mlp = mlp_train_config_from_json(read_json_file(*o.config));

  RunManifest manifest("demo-poly");
  manifest.set_config({{"arguments", echo}, {"mlp", to_json(cfg.mlp)}, {"layer_sizes", cfg.layer_sizes}});
  manifest.add_seed("sweep", cfg.seed);
  if (o.config) manifest.add_input(*o.config);

  const auto rows = size_sweep(cfg, [](const SweepRow& r) {
    std::cerr << "size " << r.size << " sim " << r.sim << ": corr raw " << fmt(r.corr_raw)
              << " smoothed " << fmt(r.corr_smoothed) << '\n';
  });

  StagedOutputs staged;
  {
    std::ofstream csv(staged.stage(o.out));
    if (!csv) throw Error("cannot write '" + o.out.string() + "'");
    write_sweep_csv(csv, rows);
  }
  staged.commit(manifest, o.out);

  std::cout << "size,corr_raw,corr_raw_se,corr_smoothed,corr_smoothed_se,mse_data,mse_model\n";
  for (const auto& s : summarize(rows)) {
    std::cout << s.size << ',' << fmt(s.corr_raw_mean) << ',' << fmt(s.corr_raw_se) << ','
              << fmt(s.corr_smoothed_mean) << ',' << fmt(s.corr_smoothed_se) << ','
              << fmt(s.mse_data_mean, "%.2f") << ',' << fmt(s.mse_model_mean, "%.2f") << '\n';
  }
  return 0;
}

int run_gen(const GenOptions& o, const ojson& echo) {
  const PopulationConfig pop = population_config_from_json(read_json_file(o.config));
  pop.validate();
  const ChoiceModel truth = choice_from_checkpoint(read_json_file(o.truth));

  const std::uint64_t pop_seed = derive_seed(o.seed, 0);
  const std::uint64_t judgment_seed = derive_seed(o.seed, 1);
  const auto dilemmas = sample_dilemma_population(pop, pop_seed);
  const auto data = sample_dataset(truth, dilemmas, pop, judgment_seed);

  RunManifest manifest("gen");
  manifest.set_config({{"arguments", echo},
                       {"population", population_config_to_json(pop)},
                       {"truth_feature_hash", truth.feature_set().hash()}});
  manifest.add_seed("seed", o.seed);
  manifest.add_seed("population", pop_seed);
  manifest.add_seed("judgments", judgment_seed);
  manifest.add_input(o.config);
  manifest.add_input(o.truth);

  StagedOutputs staged;
  write_dataset(staged.stage(o.out), data);
  staged.commit(manifest, o.out);
  std::cout << "wrote " << data.size() << " dilemmas, " << total_judgments(data) << " judgments to "
            << o.out.string() << '\n';
  return 0;
}

int run_fit(const FitOptions& o, const ojson& echo) {
  const auto data = read_dataset(o.data);
  const Split split = binned_split(data, o.split_seed);
  const FeatureSet fs = parse_feature_spec(feature_text_or_hybrid(o.features));

  RunManifest manifest("fit");
  manifest.add_seed("split", o.split_seed);
  manifest.add_input(o.data);
  if (o.features) manifest.add_input(*o.features);
  if (o.config) manifest.add_input(*o.config);

  ojson checkpoint, training, model_config;
  std::vector<double> p_test, p_train;
  std::size_t n_params = 0;
  std::vector<std::string> warnings;
  if (o.model == "hybrid") {
    const FitConfig cfg = o.config ? fit_config_from_json(read_json_file(*o.config)) : FitConfig{};
    FitResult fit = fit_choice_model(split.train, fs, cfg);
    checkpoint = choice_checkpoint(fit.model);
    p_test = predict_all(fit.model, split.test);
    p_train = predict_all(fit.model, split.train);
    n_params = fit.model.num_params();
    warnings = fit.warnings;
    training = {{"iterations", fit.iterations}, {"converged", fit.converged}, {"nll", fit.nll}};
    model_config = to_json(cfg);
  } else {
    MlpTrainConfig cfg =
        o.config ? mlp_train_config_from_json(read_json_file(*o.config)) : MlpTrainConfig{};
    // Axes named by the feature file become extra network inputs.
    if (o.features) {
      for (const auto& f : fs) {
        for (const auto& a : f.conjunction) {
          if (!a.axis.empty() && std::ranges::find(cfg.axis_inputs, a.axis) == cfg.axis_inputs.end()) {
            cfg.axis_inputs.push_back(a.axis);
          }
        }
      }
    }
    cfg.seed = derive_seed(o.split_seed, 3);
    manifest.add_seed("network", cfg.seed);
    TrainingReport report;
    const Mlp net = mlp_train_holdout(split.train, o.validation_fraction, derive_seed(o.split_seed, 2),
                                      cfg, &report);
    checkpoint = mlp_checkpoint(net);
    p_test = predict_all(net, split.test);
    p_train = predict_all(net, split.train);
    n_params = net.num_params();
    training = {{"epochs", report.epochs},
                {"best_epoch", report.best_epoch},
                {"best_validation_loss", report.best_validation_loss}};
    model_config = to_json(cfg);
  }
  manifest.set_config({{"arguments", echo}, {"model", model_config}});

  const MetricReport test = evaluate(p_test, split.test, n_params);
  ojson metrics;
  metrics["model"] = o.model;
  metrics["n_train_dilemmas"] = split.train.size();
  metrics["n_test_dilemmas"] = split.test.size();
  metrics["train"] = to_json(evaluate(p_train, split.train, n_params));
  metrics["test"] = to_json(test);
  try {
    const Calibration cal = calibration(p_test, split.test, o.calibration_min_n);
    metrics["calibration"] = {{"min_n", o.calibration_min_n}, {"slope", cal.slope}, {"intercept", cal.intercept}};
  } catch (const NumericError& e) {
    warnings.push_back(std::string("calibration unavailable: ") + e.what());
  }
  metrics["training"] = training;
  metrics["warnings"] = warnings;

  StagedOutputs staged;
  write_json_file(staged.stage(o.out), checkpoint);
  if (o.metrics) write_json_file(staged.stage(*o.metrics), metrics);
  staged.commit(manifest, o.out);

  std::cout << o.model << ": test accuracy " << fmt(test.accuracy) << ", auc " << fmt(test.auc)
            << ", normalized aic " << fmt(test.normalized_aic) << '\n';
  for (const auto& w : warnings) std::cout << "warning: " << w << '\n';
  return 0;
}

int run_residuals(const ResidualsOptions& o, const ojson& echo) {
  if (o.kind == "smoothed" && !o.reference) throw UsageError("--kind smoothed needs --reference");
  const auto data = read_dataset(o.data);
  const auto p_model = checkpoint_predictions(o.model, data);
  std::vector<double> p_reference;
  if (o.reference) p_reference = checkpoint_predictions(*o.reference, data);

  const auto records = o.kind == "smoothed" ? smoothed_residuals(data, p_model, p_reference, o.top)
                                            : raw_residuals(data, p_model, p_reference, o.min_n, o.top);
  std::string body;
  if (o.format == "json") {
    ojson arr = ojson::array();
    for (const auto& r : records) arr.push_back(to_json(r));
    body = arr.dump(2) + "\n";
  } else {
    body = residuals_csv(records);
  }

  if (!o.out) {
    std::cout << body;
    return 0;
  }
  RunManifest manifest("residuals");
  manifest.set_config({{"arguments", echo}});
  manifest.add_input(o.data);
  manifest.add_input(o.model);
  if (o.reference) manifest.add_input(*o.reference);
  StagedOutputs staged;
  std::ofstream(staged.stage(*o.out)) << body;
  staged.commit(manifest, *o.out);
  return 0;
}

namespace {

fs::path next_run_manifest(const fs::path& session_dir, const std::string& command) {
  const fs::path runs = session_dir / "runs";
  fs::create_directories(runs);
  std::size_t k = 0;
  for (const auto& e : fs::directory_iterator(runs)) {
    if (e.is_regular_file()) ++k;
  }
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%03zu-", k);
  return runs / (prefix + command + ".run.json");
}

void write_session_manifest(RunManifest& manifest, const fs::path& session_dir,
                            const std::string& command) {
  manifest.add_output(session_dir / "manifest.json", session_dir / "manifest.json");
  write_json_file(next_run_manifest(session_dir, command), manifest.to_json());
}

}  // namespace

int run_init(const InitOptions& o, const ojson& echo) {
  if (fs::exists(o.session / "manifest.json")) {
    throw UsageError("'" + o.session.string() + "' already holds a session");
  }
  SessionConfig cfg = o.config ? session_config_from_json(read_json_file(*o.config)) : SessionConfig{};
  if (o.seed) cfg.seed = *o.seed;

  RunManifest manifest("init");
  manifest.set_config({{"arguments", echo}, {"session", to_json(cfg)}});
  manifest.add_seed("session", cfg.seed);
  manifest.add_input(o.data);
  if (o.features) manifest.add_input(*o.features);
  if (o.config) manifest.add_input(*o.config);

  Session s = Session::create(read_dataset(o.data), feature_text_or_hybrid(o.features), cfg,
                              terminal_progress());

  // Build the directory beside its destination so a failure leaves nothing behind.
  fs::path tmp = o.session;
  tmp += ".tmp-init";
  fs::remove_all(tmp);
  try {
    s.save(tmp);
    if (fs::exists(o.session)) fs::remove(o.session);  // empty directory only
    fs::rename(tmp, o.session);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
  write_session_manifest(manifest, o.session, "init");
  print_report(std::cout, s.history().back());
  std::cout << "stopping check (epsilon " << cfg.stop_epsilon << "): "
            << (s.stopping_check(cfg.stop_epsilon) ? "converged" : "not converged") << '\n';
  return 0;
}

int run_iterate(const IterateOptions& o, const ojson& echo) {
  if (o.features.has_value() == o.text.has_value()) {
    throw UsageError("give exactly one of --features or --text");
  }
  const std::string text = o.features ? read_text_file(*o.features) : *o.text;
  Session s = Session::load(o.session);

  RunManifest manifest("iterate");
  manifest.set_config({{"arguments", echo}, {"feature_text", text}});
  manifest.add_seed("session", s.config().seed);
  if (o.features) manifest.add_input(*o.features);

  s.iterate(text, o.retrain_reference,
            terminal_progress());
  s.save(o.session);
  write_session_manifest(manifest, o.session, "iterate");
  print_report(std::cout, s.history().back());
  std::cout << "stopping check (epsilon " << s.config().stop_epsilon << "): "
            << (s.stopping_check(s.config().stop_epsilon) ? "converged" : "not converged") << '\n';
  return 0;
}

int run_status(const StatusOptions& o) {
  const Session s = Session::load(o.session);
  if (o.json) {
    std::cout << s.state_json().dump(2) << '\n';
    return 0;
  }
  std::cout << "session " << o.session.string() << ": " << s.data().size() << " dilemmas ("
            << s.split().train.size() << " train, " << s.split().test.size() << " test), "
            << s.features().size() << " features, status " << status_name(s.status()) << "\n\n";
  for (const auto& r : s.history()) print_report(std::cout, r);
  const double eps = s.config().stop_epsilon;
  std::cout << "\nstopping check (epsilon " << eps << "): "
            << (s.stopping_check(eps) ? "converged" : "not converged") << '\n';
  return 0;
}

int run_replay(const ReplayOptions& o, const ojson& echo) {
  const Session stored = Session::load(o.session);
  const Session replayed = Session::replay(o.session);
  bool identical = stored.history().size() == replayed.history().size();
  for (std::size_t i = 0; identical && i < stored.history().size(); ++i) {
    const bool same = to_json(stored.history()[i]).dump() == to_json(replayed.history()[i]).dump();
    std::cout << "iteration " << i << ": " << (same ? "identical" : "DIFFERS") << '\n';
    identical = identical && same;
  }
  if (o.out) {
    RunManifest manifest("replay");
    manifest.set_config({{"arguments", echo}});
    manifest.add_seed("session", replayed.config().seed);
    manifest.add_input(o.session / "manifest.json");
    replayed.save(*o.out);
    write_session_manifest(manifest, *o.out, "replay");
  }
  std::cout << (identical ? "replay reproduces every report\n" : "replay does not match\n");
  return identical ? 0 : 1;
}

int run_bayes_select(const BayesSelectOptions& o, const ojson& echo) {
  const auto data = read_dataset(o.data);
  const Split split = binned_split(data, o.split_seed);
  const FeatureSet base = parse_feature_spec(feature_text_or_hybrid(o.features));

  SelectionConfig cfg;
  cfg.max_order = o.order;
  if (o.config) {
    const nlohmann::json j = read_json_file(*o.config);
    try {
      cfg.max_rounds = j.value("max_rounds", cfg.max_rounds);
      cfg.z = j.value("z", cfg.z);
      cfg.drop_constant_columns = j.value("drop_constant_columns", cfg.drop_constant_columns);
      if (j.contains("variational")) cfg.variational = variational_from_json(j.at("variational"), cfg.variational);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("selection config: ") + e.what());
    }
  }
  if (cfg.max_order != 2 && cfg.max_order != 3) throw UsageError("--order must be 2 or 3");

  RunManifest manifest("bayes-select");
  manifest.set_config({{"arguments", echo},
                       {"max_order", cfg.max_order},
                       {"max_rounds", cfg.max_rounds},
                       {"z", cfg.z},
                       {"drop_constant_columns", cfg.drop_constant_columns},
                       {"variational", to_json(cfg.variational)}});
  manifest.add_seed("split", o.split_seed);
  manifest.add_seed("variational", cfg.variational.seed);
  manifest.add_input(o.data);
  if (o.features) manifest.add_input(*o.features);
  if (o.config) manifest.add_input(*o.config);

  const SelectionResult result = selection_loop(split.train, split.test, base, cfg);

  ojson trajectory = ojson::array();
  for (const auto& r : result.trajectory) {
    trajectory.push_back({{"n_features", r.n_features}, {"test", to_json(r.metrics)}});
    std::cout << "round " << trajectory.size() - 1 << ": " << r.n_features << " features, test acc "
              << fmt(r.metrics.accuracy) << ", auc " << fmt(r.metrics.auc) << '\n';
  }
  ojson out;
  out["final_features"] = result.final_set.to_text();
  out["posterior"] = to_json(result.posterior);
  out["trajectory"] = std::move(trajectory);
  out["warnings"] = result.warnings;
  for (const auto& w : result.warnings) std::cout << "warning: " << w << '\n';

  StagedOutputs staged;
  write_json_file(staged.stage(o.out), out);
  staged.commit(manifest, o.out);
  return 0;
}

int run_chisq(const ChisqOptions& o) {
  const ChiSquared r = two_proportion_chisq(o.k1, o.n1, o.k2, o.n2, o.yates);
  std::cout << "chi2=" << r.chi2 << " p=" << r.p_value << '\n';
  return 0;
}

int run_serve(const ServeOptions& o) {
  ServiceOptions opts;
  opts.port = o.port;
  opts.session_dir = o.session;
  if (o.static_dir) opts.static_dir = *o.static_dir;
  SessionService service(Session::load(o.session), opts);
  const int port = service.bind();
  std::cout << "serving " << o.session.string() << " on http://127.0.0.1:" << port << std::endl;
  service.listen();
  return 0;
}

}  // namespace srm::cli
