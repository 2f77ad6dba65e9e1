#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "srm/core.hpp"

namespace srm {

struct Split {
  std::vector<AggregatedJudgment> train;
  std::vector<AggregatedJudgment> test;
};

// Sorts dilemmas by n (descending, ties by id), bins consecutive groups of
// five and sends one uniformly chosen member of each full bin to test. Members
// of a trailing partial bin go to test independently with probability 0.2.
// Throws ConfigError for fewer than five dilemmas.
Split binned_split(std::span<const AggregatedJudgment> data, std::uint64_t seed);

// Judgment-weighted accuracy of the thresholded prediction; p = 0.5 earns half credit.
double accuracy(std::span<const double> p_save_left, std::span<const AggregatedJudgment> data);

// Exact Mann-Whitney AUC with each dilemma contributing n_save_left positive and
// n - n_save_left negative labels at its score. Throws NumericError when one class is empty.
double auc(std::span<const double> p_save_left, std::span<const AggregatedJudgment> data);

// (2k + 2 NLL) / number of judgments.
double normalized_aic(std::span<const double> p_save_left, std::span<const AggregatedJudgment> data,
                      std::size_t n_params);

// In-sample accuracy of predicting each dilemma's majority choice.
double empirical_upper_bound(std::span<const AggregatedJudgment> data);

std::int64_t total_judgments(std::span<const AggregatedJudgment> data);

struct MetricReport {
  double accuracy = 0.0;
  double auc = 0.0;
  double normalized_aic = 0.0;
  double nll_per_judgment = 0.0;
  std::size_t n_params = 0;
  std::int64_t n_test_judgments = 0;

  bool operator==(const MetricReport&) const = default;
};

MetricReport evaluate(std::span<const double> p_save_left, std::span<const AggregatedJudgment> data,
                      std::size_t n_params);

nlohmann::ordered_json to_json(const MetricReport& m);
MetricReport metric_report_from_json(const nlohmann::json& j);

struct CalibrationBin {
  double mean_predicted = 0.0;
  double mean_observed = 0.0;
  std::int64_t judgments = 0;
  std::size_t dilemmas = 0;
};

struct Calibration {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<CalibrationBin> bins;  // ten equal-width bins of predicted probability
};

// n-weighted least squares of p_data on the prediction over all dilemmas; the
// decile table uses only dilemmas with n >= min_n. Throws NumericError when no
// dilemma qualifies or the predictions are constant.
Calibration calibration(std::span<const double> p_save_left, std::span<const AggregatedJudgment> data,
                        int min_n = 100);

}  // namespace srm
