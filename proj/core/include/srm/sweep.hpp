#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "srm/mlp.hpp"
#include "srm/synth.hpp"

namespace srm {

// Adam defaults for the polynomial demo network.
MlpTrainConfig default_regression_train_config();

struct SweepConfig {
  std::vector<std::size_t> sizes = {100, 1000, 10000, 100000};
  int sims_per_size = 10;
  std::uint64_t seed = 0;
  PolynomialConfig polynomial;
  std::vector<int> layer_sizes = {1, 100, 50, 1};
  MlpTrainConfig mlp = default_regression_train_config();
};

// One simulation: residuals are evaluated on the generated points.
struct SweepRow {
  std::size_t size = 0;
  int sim = 0;
  double corr_raw = 0.0;       // corr(y - g, f - g)
  double corr_smoothed = 0.0;  // corr(fhat - g, f - g)
  double mse_data = 0.0;       // mean (y - f)^2
  double mse_model = 0.0;      // mean (fhat - f)^2
};

struct SweepSummary {
  std::size_t size = 0;
  double corr_raw_mean = 0.0, corr_raw_se = 0.0;
  double corr_smoothed_mean = 0.0, corr_smoothed_se = 0.0;
  double mse_data_mean = 0.0, mse_data_se = 0.0;
  double mse_model_mean = 0.0, mse_model_se = 0.0;
};

// Fits the least-squares line g and the regression network fhat to one
// generated dataset and measures both residual kinds against the truth.
SweepRow run_simulation(std::size_t size, int sim, const SweepConfig& cfg);

// Rows ordered by (size, sim). Per-simulation seeds derive from cfg.seed.
std::vector<SweepRow> size_sweep(const SweepConfig& cfg,
                                 const std::function<void(const SweepRow&)>& on_row = {});

std::vector<SweepSummary> summarize(std::span<const SweepRow> rows);

// Header `size,sim,corr_raw,corr_smoothed,mse_data,mse_model`.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace srm
