#include "srm/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "srm/choice_model.hpp"
#include "srm/error.hpp"
#include "srm/features.hpp"

namespace srm {

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes, OutputActivation output, std::uint64_t seed)
    : layer_sizes_(std::move(layer_sizes)), output_(output) {
  if (layer_sizes_.size() < 2) throw ConfigError("an MLP needs at least input and output layers");
  if (layer_sizes_.back() != 1) throw ConfigError("the output layer must have one unit");
  for (int s : layer_sizes_) {
    if (s <= 0) throw ConfigError("layer sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  for (std::size_t l = 1; l < layer_sizes_.size(); ++l) {
    const int in = layer_sizes_[l - 1];
    const int out = layer_sizes_[l];
    std::normal_distribution<double> init(0.0, std::sqrt(2.0 / in));
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = init(rng);
    }
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(out));
  }
}

std::size_t Mlp::num_params() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }
  return n;
}

Eigen::RowVectorXd Mlp::activation(const Eigen::MatrixXd& inputs) const {
  if (weights_.empty()) throw ConfigError("untrained network");
  if (inputs.rows() != weights_.front().cols()) {
    throw ConfigError("network expects " + std::to_string(weights_.front().cols()) +
                      " inputs, got " + std::to_string(inputs.rows()));
  }
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l] * a;
    z.colwise() += biases_[l];
    if (l + 1 < weights_.size()) {
      a = z.cwiseMax(0.0);
    } else {
      a = std::move(z);
    }
  }
  Eigen::RowVectorXd out = a.row(0);
  if (output_ == OutputActivation::Logistic) out = out.unaryExpr([](double z) { return logistic(z); });
  return out;
}

Eigen::RowVectorXd Mlp::predict(const Eigen::MatrixXd& inputs) const {
  return (activation(inputs).array() * output_scale + output_offset).matrix();
}

double Mlp::predict_one(std::span<const double> input) const {
  Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
  return predict(Eigen::MatrixXd(x))[0];
}

Eigen::VectorXd Mlp::parameters() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(num_params()));
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    flat.segment(pos, weights_[l].size()) = weights_[l].reshaped();
    pos += weights_[l].size();
    flat.segment(pos, biases_[l].size()) = biases_[l];
    pos += biases_[l].size();
  }
  return flat;
}

void Mlp::set_parameters(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != num_params()) {
    throw ConfigError("parameter vector has the wrong length");
  }
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l].reshaped() = flat.segment(pos, weights_[l].size());
    pos += weights_[l].size();
    biases_[l] = flat.segment(pos, biases_[l].size());
    pos += biases_[l].size();
  }
}

double mlp_loss(const Mlp& net, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                const Eigen::VectorXd& sample_weights, LossKind loss, Eigen::VectorXd* gradient) {
  const auto& weights = net.weights();
  const auto& biases = net.biases();
  const std::size_t layers = weights.size();
  const Eigen::Index batch = inputs.cols();
  const double total_weight = sample_weights.sum();
  if (batch == 0 || total_weight <= 0) return 0.0;

  // Forward pass, keeping pre-activations for the backward pass.
  std::vector<Eigen::MatrixXd> acts(layers + 1);
  std::vector<Eigen::MatrixXd> pre(layers);
  acts[0] = inputs;
  for (std::size_t l = 0; l < layers; ++l) {
    pre[l] = weights[l] * acts[l];
    pre[l].colwise() += biases[l];
    acts[l + 1] = l + 1 < layers ? pre[l].cwiseMax(0.0) : pre[l];
  }
  const Eigen::RowVectorXd z = pre.back().row(0);

  const bool logistic_out = net.output_activation() == OutputActivation::Logistic;
  double value = 0.0;
  Eigen::MatrixXd delta(1, batch);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const double w = sample_weights[i] / total_weight;
    const double t = targets[i];
    if (loss == LossKind::BinaryCrossEntropy) {
      if (!logistic_out) throw ConfigError("cross-entropy needs a logistic output");
      value += w * (t * softplus(-z[i]) + (1.0 - t) * softplus(z[i]));
      delta(0, i) = w * (logistic(z[i]) - t);
    } else {
      const double y = logistic_out ? logistic(z[i]) : z[i];
      const double r = y - t;
      value += w * r * r;
      const double dy = logistic_out ? y * (1.0 - y) : 1.0;
      delta(0, i) = w * 2.0 * r * dy;
    }
  }
  if (!gradient) return value;

  gradient->resize(static_cast<Eigen::Index>(net.num_params()));
  std::vector<Eigen::Index> offsets(layers);
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = pos;
    pos += weights[l].size() + biases[l].size();
  }
  for (std::size_t l = layers; l-- > 0;) {
    const Eigen::MatrixXd dw = delta * acts[l].transpose();
    gradient->segment(offsets[l], dw.size()) = dw.reshaped();
    gradient->segment(offsets[l] + dw.size(), biases[l].size()) = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = weights[l].transpose() * delta;
      delta = (pre[l - 1].array() > 0.0).select(back, 0.0);
    }
  }
  return value;
}

namespace {

LabeledBatch select(const LabeledBatch& b, const std::vector<Eigen::Index>& idx) {
  return {b.inputs(Eigen::all, idx), b.targets(idx), b.weights(idx)};
}

}  // namespace

Mlp train_mlp(Mlp net, const LabeledBatch& train, const LabeledBatch& validation, LossKind loss,
              const MlpTrainConfig& cfg, TrainingReport* report, const ProgressFn& progress) {
  if (cfg.batch_size <= 0 || cfg.max_epochs < 0 || cfg.learning_rate <= 0) {
    throw ConfigError("batch_size and learning_rate must be positive");
  }
  const Eigen::Index n = train.inputs.cols();
  if (n == 0) throw ConfigError("cannot train on an empty dataset");

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  Eigen::VectorXd params = net.parameters();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(params.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(params.size());
  Eigen::VectorXd grad;
  long step = 0;

  const bool has_validation = validation.inputs.cols() > 0;
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_params = params;
  int since_best = 0;
  TrainingReport local;
  TrainingReport& rep = report ? *report : local;
  rep = {};

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    double epoch_weight = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
      std::vector<Eigen::Index> idx(order.begin() + start, order.begin() + start + len);
      const LabeledBatch mb = select(train, idx);
      const double value = mlp_loss(net, mb.inputs, mb.targets, mb.weights, loss, &grad);
      if (!std::isfinite(value) || !grad.allFinite()) {
        throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch) +
                              "; try a smaller learning rate");
      }
      epoch_loss += value * mb.weights.sum();
      epoch_weight += mb.weights.sum();

      ++step;
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      params.array() -= cfg.learning_rate * (m.array() / bc1) /
                        ((v.array() / bc2).sqrt() + cfg.epsilon);
      net.set_parameters(params);
    }
    rep.epochs = epoch;
    rep.train_loss.push_back(epoch_weight > 0 ? epoch_loss / epoch_weight : 0.0);

    if (has_validation) {
      const double val =
          mlp_loss(net, validation.inputs, validation.targets, validation.weights, loss, nullptr);
      if (!std::isfinite(val)) throw DivergenceError("non-finite validation loss");
      rep.validation_loss.push_back(val);
      if (val < best) {
        best = val;
        best_params = params;
        rep.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        break;
      }
    } else {
      best_params = params;
      rep.best_epoch = epoch;
    }
    if (progress) progress(static_cast<double>(epoch) / cfg.max_epochs);
  }
  net.set_parameters(best_params);
  rep.best_validation_loss = has_validation ? best : 0.0;
  return net;
}

std::vector<double> mlp_input(const Dilemma& d, std::span<const std::string> axis_inputs) {
  const Encoding e = encode_dilemma(d);
  std::vector<double> x(e.begin(), e.end());
  for (const auto& axis : axis_inputs) {
    const auto side = classify_axis(d, axis);
    x.push_back(!side ? 0.0 : (*side == Side::Left ? 1.0 : -1.0));
  }
  return x;
}

LabeledBatch judgment_batch(std::span<const AggregatedJudgment> data,
                            std::span<const std::string> axis_inputs) {
  const auto dim = static_cast<Eigen::Index>(kEncodingSize + axis_inputs.size());
  LabeledBatch b;
  b.inputs.resize(dim, static_cast<Eigen::Index>(data.size()));
  b.targets.resize(static_cast<Eigen::Index>(data.size()));
  b.weights.resize(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = mlp_input(data[i].dilemma, axis_inputs);
    const auto col = static_cast<Eigen::Index>(i);
    b.inputs.col(col) = Eigen::Map<const Eigen::VectorXd>(x.data(), dim);
    b.targets[col] = data[i].p_data();
    b.weights[col] = data[i].n;
  }
  return b;
}

Mlp mlp_train(std::span<const AggregatedJudgment> train,
              std::span<const AggregatedJudgment> validation, const MlpTrainConfig& cfg,
              TrainingReport* report, const ProgressFn& progress) {
  if (train.empty()) throw ConfigError("cannot train the reference network on no data");
  std::vector<int> sizes = {static_cast<int>(kEncodingSize + cfg.axis_inputs.size())};
  sizes.insert(sizes.end(), cfg.hidden_layers.begin(), cfg.hidden_layers.end());
  sizes.push_back(1);
  Mlp net(sizes, OutputActivation::Logistic, cfg.seed);
  net.axis_inputs = cfg.axis_inputs;
  return train_mlp(std::move(net), judgment_batch(train, cfg.axis_inputs),
                   judgment_batch(validation, cfg.axis_inputs), LossKind::BinaryCrossEntropy, cfg,
                   report, progress);
}

Mlp mlp_train_holdout(std::span<const AggregatedJudgment> train, double validation_fraction,
                      std::uint64_t shuffle_seed, const MlpTrainConfig& cfg, TrainingReport* report,
                      const ProgressFn& progress) {
  if (validation_fraction < 0 || validation_fraction >= 1) {
    throw ConfigError("validation_fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(shuffle_seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_val = static_cast<std::size_t>(validation_fraction * static_cast<double>(idx.size()));
  std::vector<AggregatedJudgment> fit_part, validation;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    (i < n_val ? validation : fit_part).push_back(train[idx[i]]);
  }
  return mlp_train(fit_part, validation, cfg, report, progress);
}

double predict_save_left(const Mlp& net, const Dilemma& d) {
  return net.predict_one(mlp_input(d, net.axis_inputs));
}

std::vector<double> predict_all(const Mlp& net, std::span<const AggregatedJudgment> data) {
  if (data.empty()) return {};
  const auto p = net.predict(judgment_batch(data, net.axis_inputs).inputs);
  return {p.begin(), p.end()};
}

double nll(const Mlp& net, std::span<const AggregatedJudgment> data) {
  return nll_from_predictions(predict_all(net, data), data);
}

Mlp mlp_fit_regression(std::span<const RegressionPoint> points, std::vector<int> layer_sizes,
                       const MlpTrainConfig& cfg, TrainingReport* report) {
  if (points.empty()) throw ConfigError("cannot fit a regression network to no points");
  if (layer_sizes.size() < 2 || layer_sizes.front() != 1 || layer_sizes.back() != 1) {
    throw ConfigError("regression layer sizes must start and end with 1");
  }
  Mlp net(std::move(layer_sizes), OutputActivation::Linear, cfg.seed);

  double mean = 0.0;
  for (const auto& p : points) mean += p.y;
  mean /= static_cast<double>(points.size());
  double var = 0.0;
  for (const auto& p : points) var += (p.y - mean) * (p.y - mean);
  var /= static_cast<double>(points.size());
  net.output_offset = mean;
  net.output_scale = var > 0 ? std::sqrt(var) : 1.0;

  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed ^ 0x5851f42d4c957f2dull);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::size_t n_val = static_cast<std::size_t>(cfg.validation_fraction * points.size());
  if (points.size() - n_val < 1) n_val = 0;

  auto make = [&](std::size_t begin, std::size_t end) {
    LabeledBatch b;
    const auto len = static_cast<Eigen::Index>(end - begin);
    b.inputs.resize(1, len);
    b.targets.resize(len);
    b.weights = Eigen::VectorXd::Ones(len);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& p = points[idx[i]];
      const auto col = static_cast<Eigen::Index>(i - begin);
      b.inputs(0, col) = p.x;
      b.targets[col] = (p.y - net.output_offset) / net.output_scale;
    }
    return b;
  };
  const LabeledBatch validation = make(0, n_val);
  const LabeledBatch train = make(n_val, points.size());
  return train_mlp(std::move(net), train, validation, LossKind::SquaredError, cfg, report);
}

}  // namespace srm
