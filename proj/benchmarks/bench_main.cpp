#include <benchmark/benchmark.h>

#include <random>

#include "srm/choice_model.hpp"
#include "srm/features.hpp"
#include "srm/metrics.hpp"
#include "srm/mlp.hpp"
#include "srm/synth.hpp"

namespace {

std::vector<srm::AggregatedJudgment> synthetic(std::size_t n_dilemmas) {
  srm::PopulationConfig cfg;
  cfg.n_dilemmas = n_dilemmas;
  cfg.min_judgments = 100;
  cfg.max_judgments = 2000;
  const srm::FeatureSet fs = srm::hybrid_feature_set();
  Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(fs.size()), -0.8, 0.8);
  return srm::sample_dataset(srm::ChoiceModel(fs, w), srm::sample_dilemma_population(cfg, 1), cfg, 2);
}

void BM_Auc(benchmark::State& state) {
  const auto data = synthetic(static_cast<std::size_t>(state.range(0)));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(data.size());
  for (auto& v : p) v = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(srm::auc(p, data));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Auc)->Arg(1000)->Arg(10000);

void BM_ChoiceFit(benchmark::State& state) {
  const auto data = synthetic(static_cast<std::size_t>(state.range(0)));
  const srm::FeatureSet fs = srm::hybrid_feature_set();
  for (auto _ : state) benchmark::DoNotOptimize(srm::fit_choice_model(data, fs).nll);
}
BENCHMARK(BM_ChoiceFit)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_ReferenceEpoch(benchmark::State& state) {
  const auto data = synthetic(static_cast<std::size_t>(state.range(0)));
  srm::MlpTrainConfig cfg;
  cfg.max_epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(srm::mlp_train(data, {}, cfg).num_params());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ReferenceEpoch)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_FeatureEvaluation(benchmark::State& state) {
  const auto data = synthetic(1000);
  const srm::FeatureSet fs = srm::expand_interactions(srm::hybrid_feature_set(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(srm::build_design(data, fs).diff.sum());
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_FeatureEvaluation)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
