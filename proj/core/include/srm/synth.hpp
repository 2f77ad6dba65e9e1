#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srm/choice_model.hpp"
#include "srm/core.hpp"

namespace srm {

// 3x(x-2)^2(x+2)^2(x+1)
double polynomial_truth(double x);

struct PolynomialConfig {
  double noise_sd = 10.0;
  double x_min = -2.5;
  double x_max = 2.5;
};

// x ~ Uniform[x_min, x_max] rounded to three decimals, y = f(x) + Normal(0, noise_sd).
std::vector<RegressionPoint> gen_polynomial_dataset(std::size_t n, std::uint64_t seed,
                                                    const PolynomialConfig& cfg = {});

struct PopulationConfig {
  std::size_t n_dilemmas = 1000;
  int min_agents_per_side = 1;
  int max_agents_per_side = 5;
  // Respondents per dilemma, log-uniform over [min, max].
  int min_judgments = 20;
  int max_judgments = 5000;
  double axis_structured_fraction = 0.8;
  // Axes drawn for the structured recipe; empty means the whole catalog.
  std::vector<std::string> axes;
  // Probabilities of the left side crossing legally, illegally, or without a signal.
  double p_signal_legal = 1.0 / 3.0;
  double p_signal_illegal = 1.0 / 3.0;
  double p_signal_none = 1.0 / 3.0;

  // Throws ConfigError.
  void validate() const;
};

nlohmann::json population_config_to_json(const PopulationConfig& cfg);
PopulationConfig population_config_from_json(const nlohmann::json& j);

// Unique dilemmas with ids "d000000", "d000001", ... Structured dilemmas share
// a random multiset on both sides and differ by agents from the two categories
// of one axis (or, for more_vs_less, by extra agents on one side only).
// Throws ConfigError when the configuration cannot yield enough unique scenes.
std::vector<Dilemma> sample_dilemma_population(const PopulationConfig& cfg, std::uint64_t seed);

// n_save_left ~ Binomial(n, truth.predict_save_left(d)).
AggregatedJudgment sample_judgments(const ChoiceModel& truth, const Dilemma& d, int n,
                                    std::uint64_t seed);

// Draws a respondent count per dilemma (log-uniform) and samples its judgments.
// Per-dilemma seeds derive from `seed` and the dilemma position.
std::vector<AggregatedJudgment> sample_dataset(const ChoiceModel& truth,
                                               std::span<const Dilemma> dilemmas,
                                               const PopulationConfig& cfg, std::uint64_t seed);

// SplitMix64 step; used to derive independent per-item seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace srm
