#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "srm/checkpoint.hpp"
#include "srm/error.hpp"
#include "srm/mlp.hpp"
#include "srm/synth.hpp"

using namespace srm;
using A = AgentType;

namespace {

// Largest relative error between the analytic gradient and central differences.
double gradient_check(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& w, LossKind loss) {
  Eigen::VectorXd analytic;
  mlp_loss(net, x, y, w, loss, &analytic);
  const Eigen::VectorXd theta = net.parameters();
  REQUIRE(analytic.size() == theta.size());
  double worst = 0.0;
  const double h = 1e-5;
  Mlp probe = net;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd t = theta;
    t[i] += h;
    probe.set_parameters(t);
    const double up = mlp_loss(probe, x, y, w, loss, nullptr);
    t[i] -= 2 * h;
    probe.set_parameters(t);
    const double down = mlp_loss(probe, x, y, w, loss, nullptr);
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-7});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("parameter layout round-trips") {
  const Mlp net({3, 5, 2, 1}, OutputActivation::Logistic, 4);
  CHECK(net.num_params() == 3 * 5 + 5 + 5 * 2 + 2 + 2 + 1);
  Mlp copy = net;
  Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(net.num_params()), -1, 1);
  copy.set_parameters(p);
  CHECK(copy.parameters() == p);
  CHECK(copy.weights()[0](1, 0) == p[1]);  // column-major
  CHECK_THROWS_AS(copy.set_parameters(Eigen::VectorXd::Zero(3)), ConfigError);
}

TEST_CASE("gradient check on a 2-4-1 network") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Eigen::MatrixXd x(2, 8);
  Eigen::VectorXd y(8), w(8);
  for (int i = 0; i < 8; ++i) {
    x(0, i) = z(rng);
    x(1, i) = z(rng);
    y[i] = u(rng);
    w[i] = 1.0 + 10.0 * u(rng);
  }
  for (std::uint64_t seed : {1, 2, 3}) {
    Mlp logistic({2, 4, 1}, OutputActivation::Logistic, seed);
    // Keep every pre-activation away from the rectifier kink.
    logistic.biases()[0].setConstant(0.3);
    CHECK(gradient_check(logistic, x, y, w, LossKind::BinaryCrossEntropy) < 1e-4);
    Mlp linear({2, 4, 1}, OutputActivation::Linear, seed);
    linear.biases()[0].setConstant(0.3);
    CHECK(gradient_check(linear, x, y * 5.0, w, LossKind::SquaredError) < 1e-4);
  }
}

TEST_CASE("gradient check on the reference architecture") {
  PopulationConfig cfg;
  cfg.n_dilemmas = 16;
  const auto ds = sample_dilemma_population(cfg, 3);
  const ChoiceModel truth(hybrid_feature_set(), fixtures::hybrid_truth_weights());
  const auto data = sample_dataset(truth, ds, cfg, 4);
  const LabeledBatch batch = judgment_batch(data, {});
  Mlp net({42, 8, 8, 1}, OutputActivation::Logistic, 5);
  CHECK(gradient_check(net, batch.inputs, batch.targets, batch.weights, LossKind::BinaryCrossEntropy) < 1e-4);
}

TEST_CASE("a single unanimous dilemma is learned") {
  const std::vector<AggregatedJudgment> data{
      fixtures::judgment(fixtures::dilemma({{A::Girl, 1}}, {{A::Dog, 1}}), 100, 100)};
  MlpTrainConfig cfg;
  cfg.max_epochs = 400;
  cfg.patience = 400;
  cfg.learning_rate = 1e-2;
  const Mlp net = mlp_train(data, data, cfg);
  CHECK(predict_save_left(net, data[0].dilemma) > 0.95);
}

TEST_CASE("training is bitwise deterministic") {
  PopulationConfig pc;
  pc.n_dilemmas = 200;
  const auto ds = sample_dilemma_population(pc, 1);
  const ChoiceModel truth(hybrid_feature_set(), fixtures::hybrid_truth_weights());
  const auto data = sample_dataset(truth, ds, pc, 2);
  const std::span<const AggregatedJudgment> all(data);
  MlpTrainConfig cfg;
  cfg.max_epochs = 5;
  cfg.batch_size = 32;
  cfg.seed = 17;
  TrainingReport r1, r2;
  const Mlp a = mlp_train(all.subspan(0, 150), all.subspan(150), cfg, &r1);
  const Mlp b = mlp_train(all.subspan(0, 150), all.subspan(150), cfg, &r2);
  CHECK(a.parameters() == b.parameters());
  CHECK(r1.train_loss == r2.train_loss);
  cfg.seed = 18;
  const Mlp c = mlp_train(all.subspan(0, 150), all.subspan(150), cfg);
  CHECK(a.parameters() != c.parameters());
}

TEST_CASE("early stopping restores the best epoch") {
  PopulationConfig pc;
  pc.n_dilemmas = 300;
  const auto ds = sample_dilemma_population(pc, 6);
  const ChoiceModel truth(hybrid_feature_set(), fixtures::hybrid_truth_weights());
  const auto data = sample_dataset(truth, ds, pc, 7);
  const std::span<const AggregatedJudgment> all(data);
  MlpTrainConfig cfg;
  cfg.max_epochs = 60;
  cfg.batch_size = 16;
  cfg.patience = 2;
  TrainingReport report;
  const Mlp net = mlp_train(all.subspan(0, 250), all.subspan(250), cfg, &report);
  REQUIRE(report.epochs == static_cast<int>(report.validation_loss.size()));
  CHECK(report.best_epoch >= 1);
  CHECK(report.best_epoch <= report.epochs);
  const LabeledBatch val = judgment_batch(all.subspan(250), {});
  const double loss = mlp_loss(net, val.inputs, val.targets, val.weights, LossKind::BinaryCrossEntropy, nullptr);
  CHECK(loss == doctest::Approx(report.best_validation_loss).epsilon(1e-12));
  for (double v : report.validation_loss) CHECK(report.best_validation_loss <= v + 1e-15);
}

TEST_CASE("regression on a constant target") {
  std::vector<RegressionPoint> pts;
  for (int i = 0; i < 400; ++i) pts.push_back({-2.5 + 5.0 * i / 399.0, 7.0});
  MlpTrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.batch_size = 32;
  const Mlp net = mlp_fit_regression(pts, {1, 16, 1}, cfg);
  for (double x = -2.5; x <= 2.5; x += 0.25) {
    const double p = net.predict_one(std::vector<double>{x});
    CHECK(std::abs(p - 7.0) <= 7.0 * 0.01 + 0.1);
  }
  CHECK_THROWS_AS(mlp_fit_regression(pts, {2, 4, 1}, cfg), ConfigError);
}

TEST_CASE("axis inputs extend the encoding") {
  const std::vector<std::string> axes{"humans_vs_animals", "young_vs_old"};
  const Dilemma d = fixtures::dilemma({{A::Dog, 1}}, {{A::Man, 1}});
  const auto x = mlp_input(d, axes);
  REQUIRE(x.size() == 44);
  CHECK(x[42] == -1.0);
  CHECK(x[43] == 0.0);
}

TEST_CASE("network checkpoints round-trip") {
  Mlp net({44, 6, 1}, OutputActivation::Logistic, 8);
  net.axis_inputs = {"humans_vs_animals", "young_vs_old"};
  net.output_scale = 1.5;
  net.output_offset = -0.25;
  const auto j = mlp_checkpoint(net);
  const Mlp back = mlp_from_checkpoint(nlohmann::json::parse(j.dump()));
  CHECK(back.parameters() == net.parameters());
  CHECK(back.axis_inputs == net.axis_inputs);
  CHECK(back.output_scale == 1.5);
  CHECK(back.output_offset == -0.25);
  CHECK(mlp_input_hash(back) == mlp_input_hash(net));

  auto tampered = nlohmann::json::parse(j.dump());
  tampered["axis_inputs"] = {"young_vs_old"};
  CHECK_THROWS_AS(mlp_from_checkpoint(tampered), ParseError);
  auto wrong_kind = nlohmann::json::parse(j.dump());
  wrong_kind["kind"] = "choice";
  CHECK_THROWS_AS(mlp_from_checkpoint(wrong_kind), ParseError);
}

TEST_CASE("choice checkpoints round-trip") {
  const FeatureSet fs = extend_feature_set(hybrid_feature_set(), "indicator hva axis:humans_vs_animals:favored");
  Eigen::VectorXd w(23);
  w << fixtures::hybrid_truth_weights(), 0.123456789012345678;
  const ChoiceModel m(fs, w);
  const auto j = choice_checkpoint(m);
  const ChoiceModel back = choice_from_checkpoint(nlohmann::json::parse(j.dump()));
  CHECK(back.feature_set() == fs);
  CHECK(back.weights() == w);
  auto tampered = nlohmann::json::parse(j.dump());
  tampered["feature_hash"] = "0000000000000000";
  CHECK_THROWS_AS(choice_from_checkpoint(tampered), ParseError);
}
