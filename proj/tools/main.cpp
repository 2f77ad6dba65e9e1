#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "srm/error.hpp"

namespace fs = std::filesystem;
using namespace srm::cli;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Output files must land in an existing directory.
const CLI::Validator kOutputPath(
    [](std::string& value) -> std::string {
      const fs::path parent = fs::path(value).parent_path();
      if (!parent.empty() && !fs::is_directory(parent)) {
        return "directory '" + parent.string() + "' does not exist";
      }
      if (fs::is_directory(value)) return "'" + value + "' is a directory";
      return {};
    },
    "OUTPUT");

// The parsed options of one subcommand, for the run manifest.
nlohmann::ordered_json echo_options(const CLI::App& sub) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help") continue;
    if (opt->get_expected_min() == 0) {
      j[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& r = opt->results();
      if (r.size() == 1) {
        j[name] = r.front();
      } else {
        j[name] = r;
      }
    } else if (!opt->get_default_str().empty()) {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scientific regret minimization workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SRM_VERSION);

  DemoPolyOptions poly;
  auto* demo_poly = app.add_subcommand("demo-poly", "Raw vs. smoothed residuals on the polynomial demo");
  demo_poly->add_option("--sizes", poly.sizes, "Dataset sizes")->delimiter(',')->capture_default_str();
  demo_poly->add_option("--sims", poly.sims, "Simulations per size")->check(CLI::PositiveNumber)->capture_default_str();
  demo_poly->add_option("--seed", poly.seed, "Sweep seed")->capture_default_str();
  demo_poly->add_option("--config", poly.config, "Network training config (JSON)")->check(CLI::ExistingFile);
  demo_poly->add_option("--out", poly.out, "Per-simulation CSV")->required()->check(kOutputPath);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Sample a synthetic dilemma dataset from a known choice model");
  gen_cmd->add_option("--config", gen.config, "Population config (JSON)")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--truth", gen.truth, "Choice-model checkpoint used as ground truth")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--seed", gen.seed, "Seed")->required();
  gen_cmd->add_option("--out", gen.out, "Dataset (JSONL)")->required()->check(kOutputPath);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a choice model or the reference network");
  fit_cmd->add_option("--model", fit.model, "hybrid or mlp")->check(CLI::IsMember({"hybrid", "mlp"}))->capture_default_str();
  fit_cmd->add_option("--features", fit.features, "Feature spec (defaults to the 22 hybrid features)")->check(CLI::ExistingFile);
  fit_cmd->add_option("--data", fit.data, "Dataset (JSONL)")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--split-seed", fit.split_seed, "Train/test split seed")->capture_default_str();
  fit_cmd->add_option("--config", fit.config, "Optimizer config (JSON)")->check(CLI::ExistingFile);
  fit_cmd->add_option("--validation-fraction", fit.validation_fraction, "Early-stopping holdout (mlp)")
      ->check(CLI::Range(0.0, 0.99))->capture_default_str();
  fit_cmd->add_option("--calibration-min-n", fit.calibration_min_n)->check(CLI::PositiveNumber)->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "Checkpoint (JSON)")->required()->check(kOutputPath);
  fit_cmd->add_option("--metrics", fit.metrics, "Test metrics (JSON)")->check(kOutputPath);

  ResidualsOptions res;
  auto* res_cmd = app.add_subcommand("residuals", "Rank dilemmas by raw or smoothed residual");
  res_cmd->add_option("--kind", res.kind, "raw or smoothed")->check(CLI::IsMember({"raw", "smoothed"}))->capture_default_str();
  res_cmd->add_option("--model", res.model, "Model checkpoint")->required()->check(CLI::ExistingFile);
  res_cmd->add_option("--reference", res.reference, "Reference checkpoint")->check(CLI::ExistingFile);
  res_cmd->add_option("--data", res.data, "Dataset (JSONL)")->required()->check(CLI::ExistingFile);
  res_cmd->add_option("--min-n", res.min_n, "Minimum judgments for raw residuals")->check(CLI::NonNegativeNumber)->capture_default_str();
  res_cmd->add_option("--top", res.top, "Records to keep; 0 keeps all")->capture_default_str();
  res_cmd->add_option("--format", res.format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  res_cmd->add_option("--out", res.out, "Write here instead of stdout")->check(kOutputPath);

  InitOptions init;
  auto* init_cmd = app.add_subcommand("init", "Start a session: split, fit the base model, train the reference");
  init_cmd->add_option("--session", init.session, "Session directory (created)")->required();
  init_cmd->add_option("--data", init.data, "Dataset (JSONL)")->required()->check(CLI::ExistingFile);
  init_cmd->add_option("--features", init.features, "Base feature spec (defaults to hybrid)")->check(CLI::ExistingFile);
  init_cmd->add_option("--config", init.config, "Session config (JSON)")->check(CLI::ExistingFile);
  init_cmd->add_option("--seed", init.seed, "Overrides the config seed");

  IterateOptions iter;
  auto* iter_cmd = app.add_subcommand("iterate", "Add features to a session and refit");
  iter_cmd->add_option("--session", iter.session, "Session directory")->required()->check(CLI::ExistingDirectory);
  iter_cmd->add_option("--features", iter.features, "Feature spec to append")->check(CLI::ExistingFile);
  iter_cmd->add_option("--text", iter.text, "Feature spec text to append");
  iter_cmd->add_flag("--retrain-reference", iter.retrain_reference, "Retrain the reference network too");

  StatusOptions status;
  auto* status_cmd = app.add_subcommand("status", "Summarize a session");
  status_cmd->add_option("--session", status.session, "Session directory")->required()->check(CLI::ExistingDirectory);
  status_cmd->add_flag("--json", status.json, "Print the full state as JSON");

  ReplayOptions replay;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a session from its manifest and compare reports");
  replay_cmd->add_option("--session", replay.session, "Session directory")->required()->check(CLI::ExistingDirectory);
  replay_cmd->add_option("--out", replay.out, "Save the replayed session here");

  BayesSelectOptions bayes;
  auto* bayes_cmd = app.add_subcommand("bayes-select", "Variational feature selection over interactions");
  bayes_cmd->add_option("--features", bayes.features, "Base feature spec (defaults to hybrid)")->check(CLI::ExistingFile);
  bayes_cmd->add_option("--order", bayes.order, "Highest interaction order")->check(CLI::Range(2, 3))->capture_default_str();
  bayes_cmd->add_option("--data", bayes.data, "Dataset (JSONL)")->required()->check(CLI::ExistingFile);
  bayes_cmd->add_option("--split-seed", bayes.split_seed)->capture_default_str();
  bayes_cmd->add_option("--config", bayes.config, "Selection config (JSON)")->check(CLI::ExistingFile);
  bayes_cmd->add_option("--out", bayes.out, "Selection result (JSON)")->required()->check(kOutputPath);

  ChisqOptions chi;
  auto* chisq_cmd = app.add_subcommand("chisq", "Two-proportion chi-squared test");
  chisq_cmd->add_option("--k1", chi.k1)->required()->check(CLI::NonNegativeNumber);
  chisq_cmd->add_option("--n1", chi.n1)->required()->check(CLI::PositiveNumber);
  chisq_cmd->add_option("--k2", chi.k2)->required()->check(CLI::NonNegativeNumber);
  chisq_cmd->add_option("--n2", chi.n2)->required()->check(CLI::PositiveNumber);
  chisq_cmd->add_flag("--yates", chi.yates, "Continuity correction");

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve a session over HTTP on the loopback interface");
  serve_cmd->add_option("--port", serve.port, "0 picks a free port")->check(CLI::Range(0, 65535))->capture_default_str();
  serve_cmd->add_option("--session", serve.session, "Session directory")->required()->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--static", serve.static_dir, "Directory served at /")->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*demo_poly) return run_demo_poly(poly, echo_options(*demo_poly));
    if (*gen_cmd) return run_gen(gen, echo_options(*gen_cmd));
    if (*fit_cmd) return run_fit(fit, echo_options(*fit_cmd));
    if (*res_cmd) return run_residuals(res, echo_options(*res_cmd));
    if (*init_cmd) return run_init(init, echo_options(*init_cmd));
    if (*iter_cmd) return run_iterate(iter, echo_options(*iter_cmd));
    if (*status_cmd) return run_status(status);
    if (*replay_cmd) return run_replay(replay, echo_options(*replay_cmd));
    if (*bayes_cmd) return run_bayes_select(bayes, echo_options(*bayes_cmd));
    if (*chisq_cmd) {
      if (chi.k1 > chi.n1 || chi.k2 > chi.n2) throw UsageError("successes cannot exceed trials");
      return run_chisq(chi);
    }
    if (*serve_cmd) return run_serve(serve);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\nRun with --help for more information.\n";
    return kExitUsage;
  } catch (const srm::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
