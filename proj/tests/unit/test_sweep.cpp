#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "srm/stats.hpp"
#include "srm/sweep.hpp"
#include "srm/synth.hpp"

using namespace srm;

namespace {

SweepConfig small_config() {
  SweepConfig cfg;
  cfg.sizes = {200};
  cfg.sims_per_size = 2;
  cfg.seed = 3;
  cfg.mlp.max_epochs = 20;
  return cfg;
}

}  // namespace

TEST_CASE("a simulation row is internally consistent") {
  const SweepConfig cfg = small_config();
  const SweepRow row = run_simulation(200, 0, cfg);
  CHECK(row.size == 200);
  CHECK(row.corr_raw > -1.0);
  CHECK(row.corr_raw < 1.0);
  CHECK(row.corr_smoothed <= 1.0);
  CHECK(row.mse_data > 40.0);
  CHECK(row.mse_data < 200.0);
  CHECK(row.mse_model >= 0.0);
}

TEST_CASE("data-side quantities match an independent recomputation") {
  SweepConfig cfg = small_config();
  cfg.mlp.max_epochs = 1;
  const SweepRow row = run_simulation(500, 1, cfg);
  const auto pts = gen_polynomial_dataset(500, derive_seed(cfg.seed, 500 * 1000003ull + 1));
  std::vector<double> x, y, f;
  for (const auto& p : pts) {
    x.push_back(p.x);
    y.push_back(p.y);
    f.push_back(oracle::polynomial(p.x));
  }
  // Ordinary least squares from the normal equations.
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  std::vector<double> raw, truth;
  double mse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double g = intercept + slope * x[i];
    raw.push_back(y[i] - g);
    truth.push_back(f[i] - g);
    mse += (y[i] - f[i]) * (y[i] - f[i]);
  }
  CHECK(row.mse_data == doctest::Approx(mse / n).epsilon(1e-9));
  CHECK(row.corr_raw == doctest::Approx(oracle::pearson(raw, truth)).epsilon(1e-9));
}

TEST_CASE("sweeps are deterministic and ordered") {
  const SweepConfig cfg = small_config();
  int seen = 0;
  const auto a = size_sweep(cfg, [&](const SweepRow&) { ++seen; });
  const auto b = size_sweep(cfg);
  CHECK(seen == 2);
  REQUIRE(a.size() == 2);
  CHECK(a[0].sim == 0);
  CHECK(a[1].sim == 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].corr_raw == b[i].corr_raw);
    CHECK(a[i].corr_smoothed == b[i].corr_smoothed);
    CHECK(a[i].mse_model == b[i].mse_model);
  }
  std::ostringstream out;
  write_sweep_csv(out, a);
  CHECK(out.str().rfind("size,sim,corr_raw,corr_smoothed,mse_data,mse_model\n200,0,", 0) == 0);
}

TEST_CASE("summaries average per size") {
  std::vector<SweepRow> rows{{100, 0, 0.2, 0.4, 99, 50}, {100, 1, 0.4, 0.6, 101, 70}, {1000, 0, 0.9, 0.95, 100, 5}};
  const auto s = summarize(rows);
  REQUIRE(s.size() == 2);
  CHECK(s[0].size == 100);
  CHECK(s[0].corr_raw_mean == doctest::Approx(0.3));
  CHECK(s[0].mse_data_mean == doctest::Approx(100));
  CHECK(s[0].mse_model_se == doctest::Approx(10.0));
  CHECK(s[1].corr_smoothed_se == 0.0);
}
