// Acceptance harness: one PASS/FAIL line per criterion. Exit status 1 when
// any criterion fails. Pass a substring to run only matching criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "srm/choice_model.hpp"
#include "srm/error.hpp"
#include "srm/features.hpp"
#include "srm/metrics.hpp"
#include "srm/mlp.hpp"
#include "srm/session.hpp"
#include "srm/stats.hpp"
#include "srm/sweep.hpp"
#include "srm/synth.hpp"
#include "srm/variational.hpp"

using namespace srm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  Outcome() = default;
  Outcome(bool pass, std::string detail, std::string note = {})
      : pass(pass), detail(std::move(detail)), note(std::move(note)) {}

  bool pass = false;
  std::string detail;
  std::string note;  // informational, never affects the verdict
};

std::string fmt(const char* spec, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, spec, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome monte_carlo_decomposition() {
  constexpr std::size_t n = 100000;
  const auto points = gen_polynomial_dataset(n, 2024);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = points[i].x;
    y[i] = points[i].y;
  }
  const Line g = fit_line(x, y);
  // Per-point (y - g)^2 - (f - g)^2; its mean estimates sigma^2 = 100.
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = polynomial_truth(x[i]);
    d[i] = (y[i] - g(x[i])) * (y[i] - g(x[i])) - (f - g(x[i])) * (f - g(x[i]));
  }
  const double err = mean(d) - 100.0;
  const double se = standard_error(d);
  return {std::abs(err) < 3 * se, fmt("mean difference - 100 = %+.3f, 3*SE = %.3f", err, 3 * se)};
}

Outcome figure_three_sweep() {
  SweepConfig cfg;
  cfg.seed = 7;
  const auto rows = size_sweep(cfg);
  const auto summary = summarize(rows);
  bool mse_ok = true;
  std::string detail;
  const SweepSummary* small = nullptr;
  const SweepSummary* large = nullptr;
  for (const auto& s : summary) {
    mse_ok = mse_ok && s.mse_data_mean >= 90 && s.mse_data_mean <= 110;
    detail += fmt("[n=%zu raw %.3f smoothed %.3f mse_data %.1f mse_mlp %.1f] ", s.size, s.corr_raw_mean,
                  s.corr_smoothed_mean, s.mse_data_mean, s.mse_model_mean);
    if (s.size == 100) small = &s;
    if (s.size == 100000) large = &s;
  }
  if (!small || !large) return {false, "sweep lacks sizes 100 and 100000"};
  const bool mlp_ok = large->mse_model_mean < 100;
  const bool large_ok = large->corr_smoothed_mean > large->corr_raw_mean;
  const double diff = small->corr_smoothed_mean - small->corr_raw_mean;
  const double tie = 2 * std::hypot(small->corr_raw_se, small->corr_smoothed_se);
  const bool small_ok = diff < 0 || std::abs(diff) < tie;
  detail += fmt("(a) %s (b) %s (c) large %s, small %s", mse_ok ? "ok" : "no", mlp_ok ? "ok" : "no",
                large_ok ? "ok" : "no", small_ok ? "ok" : "no");
  return {mse_ok && mlp_ok && large_ok && small_ok, detail};
}

Outcome parameter_recovery() {
  PopulationConfig cfg;
  cfg.n_dilemmas = 2000;
  cfg.min_judgments = cfg.max_judgments = 500;
  const FeatureSet fs = hybrid_feature_set();
  const Eigen::VectorXd truth = fixtures::hybrid_truth_weights();
  const auto data = sample_dataset(ChoiceModel(fs, truth), sample_dilemma_population(cfg, 101), cfg, 102);
  const FitResult fit = fit_choice_model(data, fs);
  const double err = (fit.model.weights() - truth).cwiseAbs().maxCoeff();
  return {err <= 0.05 && fit.converged,
          fmt("%lld judgments, max |w - w*| = %.4f, converged %s", static_cast<long long>(total_judgments(data)),
              err, fit.converged ? "yes" : "no")};
}

// Shared by the loop-closure, calibration and determinism criteria.
struct LoopScenario {
  std::optional<Session> session;
  double gap0 = 0.0;
};

const char* kHumansVsAnimals = "indicator hva axis:humans_vs_animals:favored\n";
const char* kKidIllegal = "indicator kid_illegal (and axis:young_vs_old:favored signal:illegal)\n";

LoopScenario& loop_scenario() {
  static LoopScenario s = [] {
    LoopScenario out;
    const FeatureSet truth_fs =
        extend_feature_set(hybrid_feature_set(), std::string(kHumansVsAnimals) + kKidIllegal);
    Eigen::VectorXd w(24);
    w << fixtures::hybrid_truth_weights(), 3.0, -3.0;
    PopulationConfig cfg;
    cfg.n_dilemmas = 60000;
    cfg.min_judgments = 100;
    cfg.max_judgments = 3000;
    cfg.axes = {"humans_vs_animals", "young_vs_old", "more_vs_less"};
    auto data = sample_dataset(ChoiceModel(truth_fs, w), sample_dilemma_population(cfg, 41), cfg, 42);
    SessionConfig scfg;
    scfg.seed = 5;
    out.session = Session::create(std::move(data), hybrid_feature_text(), scfg);
    const auto& r0 = out.session->history().front();
    out.gap0 = r0.reference.accuracy - r0.choice.accuracy;
    out.session->iterate(std::string(kHumansVsAnimals) + kKidIllegal);
    return out;
  }();
  return s;
}

Outcome loop_closure() {
  const LoopScenario& s = loop_scenario();
  const auto& last = s.session->history().back();
  const double gap = last.reference.accuracy - last.choice.accuracy;
  const bool stop = s.session->stopping_check(0.005);
  return {s.gap0 >= 0.01 && gap <= 0.005 && stop,
          fmt("iteration 0 gap %.4f, after adding hva + kid_illegal gap %.4f (auc gap %.4f), stop(0.005) %s",
              s.gap0, gap, last.reference.auc - last.choice.auc, stop ? "true" : "false")};
}

Outcome auc_oracle() {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> n_dilemmas(1, 50), n_judgments(1, 40), score_grid(0, 20);
  int checked = 0, undefined = 0;
  double worst = 0.0;
  for (int instance = 0; instance < 200; ++instance) {
    std::vector<AggregatedJudgment> data;
    std::vector<double> scores;
    std::vector<oracle::ScoredCounts> items;
    const int m = n_dilemmas(rng);
    for (int i = 0; i < m; ++i) {
      AggregatedJudgment j;
      j.dilemma.id = "d" + std::to_string(i);
      j.n = n_judgments(rng);
      j.n_save_left = std::uniform_int_distribution<int>(0, j.n)(rng);
      // A coarse grid forces tied scores.
      const double score = score_grid(rng) / 20.0;
      data.push_back(j);
      scores.push_back(score);
      items.push_back({score, j.n_save_left, j.n - j.n_save_left});
    }
    long pos = 0, neg = 0;
    for (const auto& it : items) {
      pos += it.positives;
      neg += it.negatives;
    }
    if (pos == 0 || neg == 0) {
      ++undefined;
      try {
        auc(scores, data);
        return {false, "AUC accepted a one-class instance"};
      } catch (const NumericError&) {
      }
      continue;
    }
    worst = std::max(worst, std::abs(auc(scores, data) - oracle::brute_force_auc(items)));
    ++checked;
  }
  return {worst <= 1e-12, fmt("200 instances (%d scored, %d one-class rejected), max deviation %.2e",
                              checked, undefined, worst)};
}

Outcome gradient_check() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Eigen::MatrixXd x(2, 16);
  Eigen::VectorXd y(16), w(16);
  for (int i = 0; i < 16; ++i) {
    x(0, i) = z(rng);
    x(1, i) = z(rng);
    y[i] = u(rng);
    w[i] = 1.0 + 10.0 * u(rng);
  }
  Mlp net({2, 4, 1}, OutputActivation::Logistic, 17);
  net.biases()[0].setConstant(0.3);  // stay off the rectifier kink
  Eigen::VectorXd analytic;
  mlp_loss(net, x, y, w, LossKind::BinaryCrossEntropy, &analytic);
  const Eigen::VectorXd theta = net.parameters();
  Mlp probe = net;
  double worst = 0.0;
  const double h = 1e-5;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd t = theta;
    t[i] += h;
    probe.set_parameters(t);
    const double up = mlp_loss(probe, x, y, w, LossKind::BinaryCrossEntropy, nullptr);
    t[i] -= 2 * h;
    probe.set_parameters(t);
    const double down = mlp_loss(probe, x, y, w, LossKind::BinaryCrossEntropy, nullptr);
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-7});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
  }
  return {worst < 1e-4, fmt("%lld parameters, max relative error %.2e", static_cast<long long>(theta.size()), worst)};
}

// 50 candidates: the hybrid features, one indicator per catalog axis, each
// axis crossed with an illegal crossing, and four axes crossed with swerving.
FeatureSet selection_candidates() {
  std::string text = hybrid_feature_text();
  const auto& axes = axis_catalog();
  for (const auto& a : axes) text += "indicator ax_" + a.name + " axis:" + a.name + ":favored\n";
  for (const auto& a : axes) {
    text += "indicator ill_" + a.name + " (and axis:" + a.name + ":favored signal:illegal)\n";
  }
  for (std::size_t i = 0; i < 4; ++i) {
    text += "indicator int_" + axes[i].name + " (and intervention axis:" + axes[i].name + ":favored)\n";
  }
  return parse_feature_spec(text);
}

struct SelectionTally {
  std::size_t candidates = 0;
  int found = 0;
  int false_survivors = 0;
  bool monotone = true;
  std::vector<std::size_t> counts;
};

SelectionTally run_selection(std::uint64_t population_seed, std::uint64_t judgment_seed) {
  const FeatureSet fs = selection_candidates();
  const std::vector<std::pair<std::string, double>> active = {
      {"Pregnant", 0.5}, {"Stroller", 0.5},        {"Boy", 0.6},      {"Criminal", -0.5},
      {"Dog", -0.7},     {"Cat", -0.7},            {"swerve_penalty", -0.3}, {"illegal", -0.5},
      {"ax_humans_vs_animals", 1.0}, {"ill_young_vs_old", -0.8}};
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fs.size()));
  for (const auto& [name, value] : active) w[static_cast<Eigen::Index>(*fs.find(name))] = value;

  PopulationConfig cfg;
  cfg.n_dilemmas = 2000;
  cfg.min_judgments = cfg.max_judgments = 250;
  const auto data =
      sample_dataset(ChoiceModel(fs, w), sample_dilemma_population(cfg, population_seed), cfg, judgment_seed);
  SelectionConfig scfg;
  scfg.max_order = 1;
  const SelectionResult r = selection_loop(data, data, fs, scfg);

  SelectionTally t;
  t.candidates = fs.size();
  for (const auto& round : r.trajectory) {
    if (!t.counts.empty() && round.n_features > t.counts.back()) t.monotone = false;
    t.counts.push_back(round.n_features);
  }
  for (const auto& f : r.final_set) {
    const bool is_active = std::ranges::any_of(active, [&](const auto& a) { return a.first == f.name; });
    (is_active ? t.found : t.false_survivors) += 1;
  }
  return t;
}

Outcome bayesian_selection() {
  const SelectionTally t = run_selection(11, 12);
  std::string counts;
  for (std::size_t c : t.counts) counts += (counts.empty() ? "" : "->") + std::to_string(c);
  const double recall = t.found / 10.0;
  // Other seeds of the same design; mean-field intervals are narrow on
  // correlated candidates, so the false-survivor count varies between draws.
  std::string others;
  for (std::uint64_t s = 1; s <= 6; ++s) {
    const SelectionTally o = run_selection(11 + s, 12 + s);
    others += fmt("%s%d/%d", others.empty() ? "" : " ", o.found, o.false_survivors);
  }
  return {t.candidates == 50 && recall >= 0.9 && t.false_survivors <= 5 && t.monotone,
          fmt("%zu candidates, 500000 judgments, rounds %s, recall %.2f, false survivors %d", t.candidates,
              counts.c_str(), recall, t.false_survivors),
          "found/false survivors at six further seeds: " + others};
}

Outcome chi_squared() {
  // Proportions saved (criminal, other) with N = 326 per proportion; the other
  // character is a homeless person, an old man, then a man.
  struct Row {
    double criminal, other;
    bool below_001;
  };
  const Row rows[] = {{0.65, 0.88, true}, {0.68, 0.84, true}, {0.63, 0.79, true},
                      {0.78, 0.89, true}, {0.71, 0.90, true}, {0.69, 0.83, true},
                      {0.65, 0.87, true}, {0.68, 0.82, true}, {0.63, 0.81, true},
                      {0.78, 0.87, false}, {0.71, 0.88, true}, {0.69, 0.85, true},
                      {0.65, 0.89, true}, {0.68, 0.85, true}, {0.63, 0.81, true},
                      {0.78, 0.91, true}, {0.71, 0.89, true}, {0.69, 0.83, true}};
  constexpr long n = 326;
  int matched = 0, homeless_001 = 0;
  for (std::size_t i = 0; i < std::size(rows); ++i) {
    const Row& r = rows[i];
    const ChiSquared c = two_proportion_chisq(std::lround(r.criminal * n), n, std::lround(r.other * n), n);
    if (c.p_value < 0.05 && (c.p_value < 0.001) == r.below_001) ++matched;
    if (i < 6 && c.p_value < 0.001) ++homeless_001;
  }
  const ChiSquared anchor = two_proportion_chisq(30, 100, 50, 100);
  const bool anchor_ok = std::abs(anchor.chi2 - 25.0 / 3.0) < 1e-3;
  return {matched == static_cast<int>(std::size(rows)) && homeless_001 == 6 && anchor_ok,
          fmt("%d/%zu significance calls reproduced (%d/6 criminal-vs-homeless at p < .001), "
              "chi2(30/100, 50/100) = %.6f, p = %.4f",
              matched, std::size(rows), homeless_001, anchor.chi2, anchor.p_value)};
}

Outcome calibration_check() {
  const Session& s = *loop_scenario().session;
  const auto& test = s.split().test;
  const auto p = predict_all(s.reference(), test);
  const Calibration cal = calibration(p, test, 100);
  return {cal.slope >= 0.95 && cal.slope <= 1.05 && std::abs(cal.intercept) <= 0.02,
          fmt("reference network on %zu held-out dilemmas (n >= 100): slope %.4f, intercept %+.4f", test.size(),
              cal.slope, cal.intercept)};
}

Outcome determinism() {
  const Session& s = *loop_scenario().session;
  const fs::path dir = fs::temp_directory_path() / "srm_acceptance_replay";
  fs::remove_all(dir);
  s.save(dir);
  const Session replayed = Session::replay(dir);
  fs::remove_all(dir);
  if (replayed.history().size() != s.history().size()) return {false, "history lengths differ"};
  for (std::size_t i = 0; i < s.history().size(); ++i) {
    if (to_json(s.history()[i]).dump() != to_json(replayed.history()[i]).dump()) {
      return {false, fmt("iteration %zu report differs after replay", i)};
    }
  }
  return {true, fmt("%zu iteration reports byte-identical after replay", s.history().size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string filter = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"monte-carlo-decomposition", monte_carlo_decomposition},
      {"figure-3-sweep", figure_three_sweep},
      {"parameter-recovery", parameter_recovery},
      {"srm-loop-closure", loop_closure},
      {"auc-oracle", auc_oracle},
      {"mlp-gradient-check", gradient_check},
      {"bayesian-selection", bayesian_selection},
      {"chi-squared", chi_squared},
      {"calibration", calibration_check},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    if (!filter.empty() && name.find(filter) == std::string::npos) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << fmt(" (%.1fs)", secs) << std::endl;
    if (!o.note.empty()) std::cout << "     " << name << " note: " << o.note << std::endl;
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
