#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srm/core.hpp"

namespace srm {

enum class OutputActivation { Logistic, Linear };
enum class LossKind { BinaryCrossEntropy, SquaredError };

// Feed-forward network with rectifier hidden layers. Predictions are
// `output_offset + output_scale * activation(z)`; the affine map lets
// regression train on standardized targets.
class Mlp {
 public:
  Mlp() = default;
  // He-normal weights, zero biases.
  Mlp(std::vector<int> layer_sizes, OutputActivation output, std::uint64_t seed);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  OutputActivation output_activation() const { return output_; }
  std::size_t num_layers() const { return weights_.size(); }
  std::size_t num_params() const;

  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  std::vector<Eigen::VectorXd>& biases() { return biases_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

  double output_scale = 1.0;
  double output_offset = 0.0;
  // Axis names whose classification (+1 left favored, -1 right favored, 0 none)
  // is appended to the 42-value dilemma encoding.
  std::vector<std::string> axis_inputs;

  // inputs: one column per sample. Returns the activation before the output map.
  Eigen::RowVectorXd activation(const Eigen::MatrixXd& inputs) const;
  Eigen::RowVectorXd predict(const Eigen::MatrixXd& inputs) const;
  double predict_one(std::span<const double> input) const;

  // Flattened parameters in layer order (weights column-major, then bias).
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& flat);

 private:
  std::vector<int> layer_sizes_;
  OutputActivation output_ = OutputActivation::Logistic;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

// Weighted mean loss over a batch, evaluated in the network's own output
// space (before output_scale/offset). For cross-entropy the targets are soft
// labels in [0, 1]. Returns the loss and, when `gradient` is non-null, fills it
// with d loss / d parameters in the order of Mlp::parameters().
double mlp_loss(const Mlp& net, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                const Eigen::VectorXd& sample_weights, LossKind loss, Eigen::VectorXd* gradient);

struct MlpTrainConfig {
  std::vector<int> hidden_layers = {32, 32, 32};
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 512;
  int max_epochs = 100;
  // Epochs without validation improvement before stopping.
  int patience = 3;
  // Share of the training points held out for early stopping (regression only;
  // classification takes an explicit validation set).
  double validation_fraction = 0.1;
  std::vector<std::string> axis_inputs;
  std::uint64_t seed = 0;
};

struct TrainingReport {
  int epochs = 0;
  int best_epoch = 0;
  double best_validation_loss = 0.0;
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
};

using ProgressFn = std::function<void(double fraction)>;

struct LabeledBatch {
  Eigen::MatrixXd inputs;   // one column per sample
  Eigen::VectorXd targets;
  Eigen::VectorXd weights;
};

// Generic minibatch Adam loop with early stopping on the validation loss.
// The best-validation parameters are restored. Deterministic given cfg.seed.
// Throws DivergenceError on a non-finite loss.
Mlp train_mlp(Mlp net, const LabeledBatch& train, const LabeledBatch& validation, LossKind loss,
              const MlpTrainConfig& cfg, TrainingReport* report = nullptr,
              const ProgressFn& progress = {});

std::vector<double> mlp_input(const Dilemma& d, std::span<const std::string> axis_inputs);
LabeledBatch judgment_batch(std::span<const AggregatedJudgment> data,
                            std::span<const std::string> axis_inputs);

// Reference network for choice data: logistic output, per-dilemma soft target
// n_save_left / n with weight n, which equals per-judgment cross-entropy.
Mlp mlp_train(std::span<const AggregatedJudgment> train,
              std::span<const AggregatedJudgment> validation, const MlpTrainConfig& cfg,
              TrainingReport* report = nullptr, const ProgressFn& progress = {});

// Shuffles `train` with `shuffle_seed`, holds out the first
// validation_fraction of it for early stopping and trains on the rest.
Mlp mlp_train_holdout(std::span<const AggregatedJudgment> train, double validation_fraction,
                      std::uint64_t shuffle_seed, const MlpTrainConfig& cfg,
                      TrainingReport* report = nullptr, const ProgressFn& progress = {});

double predict_save_left(const Mlp& net, const Dilemma& d);
std::vector<double> predict_all(const Mlp& net, std::span<const AggregatedJudgment> data);
double nll(const Mlp& net, std::span<const AggregatedJudgment> data);

// Squared-error regression with a linear output on standardized targets.
// layer_sizes must start and end with 1.
Mlp mlp_fit_regression(std::span<const RegressionPoint> points, std::vector<int> layer_sizes,
                       const MlpTrainConfig& cfg, TrainingReport* report = nullptr);

}  // namespace srm
