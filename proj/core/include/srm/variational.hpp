#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "srm/choice_model.hpp"
#include "srm/features.hpp"
#include "srm/metrics.hpp"

namespace srm {

struct VariationalConfig {
  double prior_sd = 0.1;
  int steps = 4000;
  double learning_rate = 0.05;
  // Iterates averaged over the final share of steps.
  double averaging_fraction = 0.25;
  std::uint64_t seed = 0;
};

// Diagonal Gaussian posterior over the choice-model weights.
struct PosteriorSummary {
  FeatureSet features;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;

  // Posterior-mean point model.
  ChoiceModel point_model() const { return ChoiceModel(features, mean); }
  // 0 lies outside mean +/- z * sd.
  bool significant(std::size_t i, double z = 1.96) const;
};

// Mean-field variational inference for the aggregated softmax likelihood with
// a N(0, prior_sd^2) prior on every weight. The ELBO is maximised by Adam on
// reparameterised samples of each dilemma's value difference (the local form
// of the weight reparameterisation), with analytic KL gradients. Deterministic
// given cfg.seed. Throws DivergenceError when the iterates stop being finite.
PosteriorSummary fit_variational_blr(std::span<const AggregatedJudgment> data, const FeatureSet& fs,
                                     const VariationalConfig& cfg = {});

struct SelectionConfig {
  int max_order = 3;
  int max_rounds = 20;
  double z = 1.96;
  bool drop_constant_columns = true;
  VariationalConfig variational;
};

struct SelectionRound {
  std::size_t n_features = 0;
  MetricReport metrics;
};

struct SelectionResult {
  FeatureSet final_set;
  PosteriorSummary posterior;
  std::vector<SelectionRound> trajectory;
  std::vector<std::string> warnings;
};

// Expands base_fs to max_order interactions, then repeatedly fits the
// variational posterior and drops every feature whose 95% interval covers 0,
// until nothing is dropped or max_rounds is reached. Metrics are computed on
// `evaluation` with posterior means.
SelectionResult selection_loop(std::span<const AggregatedJudgment> train,
                               std::span<const AggregatedJudgment> evaluation,
                               const FeatureSet& base_fs, const SelectionConfig& cfg = {});

nlohmann::ordered_json to_json(const PosteriorSummary& p);

}  // namespace srm
