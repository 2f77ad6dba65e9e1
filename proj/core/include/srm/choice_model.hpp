#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srm/core.hpp"
#include "srm/features.hpp"

namespace srm {

// Probability clamp applied before taking logs.
inline constexpr double kProbabilityClamp = 1e-12;

// Softmax chooser over two side values. Weights are the utilities of Count
// features and the principle strengths of Indicator/Product features.
class ChoiceModel {
 public:
  ChoiceModel() = default;
  // Zero weights.
  explicit ChoiceModel(FeatureSet fs);
  // Throws ConfigError when sizes differ or a weight is non-finite.
  ChoiceModel(FeatureSet fs, Eigen::VectorXd weights);

  const FeatureSet& feature_set() const { return features_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  std::size_t num_params() const { return features_.size(); }

  // Throws ConfigError on a length mismatch.
  double side_value(std::span<const double> x_side) const;
  double predict_save_left(const Dilemma& d) const;

 private:
  FeatureSet features_;
  Eigen::VectorXd weights_;
};

// Numerically stable exp(a) / (exp(a) + exp(b)).
double softmax_left(double v_left, double v_right);

// Per-dilemma rows of (x_left - x_right) with counts, the only quantities the
// aggregated likelihood depends on.
struct DesignMatrix {
  Eigen::MatrixXd diff;        // dilemmas x features
  Eigen::VectorXd n;           // respondents per dilemma
  Eigen::VectorXd n_save_left;
};

DesignMatrix build_design(std::span<const AggregatedJudgment> data, const FeatureSet& fs);

enum class FitMethod {
  // Damped Newton steps with backtracking.
  Newton,
  // Full-batch gradient descent with backtracking.
  GradientDescent,
};

struct FitConfig {
  double step_size = 0.1;
  int max_epochs = 500;
  // Stop when the per-judgment NLL improves by less than this.
  double tolerance = 1e-8;
  double l2_penalty = 0.0;
  FitMethod method = FitMethod::Newton;
};

struct FitResult {
  ChoiceModel model;
  double nll = 0.0;  // total, nats, without the penalty
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

// Maximum-likelihood fit of the aggregated softmax likelihood. The penalised
// objective never increases between iterations. Throws ConfigError on empty
// data and DivergenceError on a non-finite loss.
FitResult fit_choice_model(std::span<const AggregatedJudgment> data, const FeatureSet& fs,
                           const FitConfig& cfg = {});

std::vector<double> predict_all(const ChoiceModel& m, std::span<const AggregatedJudgment> data);

// Total binomial NLL in nats with probabilities clamped to
// [kProbabilityClamp, 1 - kProbabilityClamp].
double nll_from_predictions(std::span<const double> p_save_left,
                            std::span<const AggregatedJudgment> data);
double nll(const ChoiceModel& m, std::span<const AggregatedJudgment> data);

}  // namespace srm
