#include "srm/sweep.hpp"

#include <map>
#include <ostream>

#include "srm/stats.hpp"

namespace srm {

MlpTrainConfig default_regression_train_config() {
  MlpTrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.batch_size = 64;
  cfg.max_epochs = 100;
  cfg.patience = 5;
  cfg.validation_fraction = 0.1;
  return cfg;
}

SweepRow run_simulation(std::size_t size, int sim, const SweepConfig& cfg) {
  const std::uint64_t seed = derive_seed(cfg.seed, size * 1000003ull + static_cast<std::uint64_t>(sim));
  const auto points = gen_polynomial_dataset(size, seed, cfg.polynomial);

  std::vector<double> x(points.size()), y(points.size()), f(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    x[i] = points[i].x;
    y[i] = points[i].y;
    f[i] = polynomial_truth(points[i].x);
  }
  const Line g = fit_line(x, y);

  MlpTrainConfig mlp_cfg = cfg.mlp;
  mlp_cfg.seed = derive_seed(seed, 1);
  const Mlp net = mlp_fit_regression(points, cfg.layer_sizes, mlp_cfg);
  const Eigen::RowVectorXd fhat =
      net.predict(Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));

  std::vector<double> raw(points.size()), smoothed(points.size()), truth(points.size());
  SweepRow row;
  row.size = size;
  row.sim = sim;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double gi = g(x[i]);
    const auto col = static_cast<Eigen::Index>(i);
    raw[i] = y[i] - gi;
    smoothed[i] = fhat[col] - gi;
    truth[i] = f[i] - gi;
    row.mse_data += (y[i] - f[i]) * (y[i] - f[i]);
    row.mse_model += (fhat[col] - f[i]) * (fhat[col] - f[i]);
  }
  row.mse_data /= static_cast<double>(points.size());
  row.mse_model /= static_cast<double>(points.size());
  row.corr_raw = pearson(raw, truth);
  row.corr_smoothed = pearson(smoothed, truth);
  return row;
}

std::vector<SweepRow> size_sweep(const SweepConfig& cfg,
                                 const std::function<void(const SweepRow&)>& on_row) {
  std::vector<SweepRow> rows;
  for (std::size_t size : cfg.sizes) {
    for (int sim = 0; sim < cfg.sims_per_size; ++sim) {
      rows.push_back(run_simulation(size, sim, cfg));
      if (on_row) on_row(rows.back());
    }
  }
  return rows;
}

std::vector<SweepSummary> summarize(std::span<const SweepRow> rows) {
  std::map<std::size_t, std::vector<const SweepRow*>> by_size;
  for (const auto& r : rows) by_size[r.size].push_back(&r);
  std::vector<SweepSummary> out;
  for (const auto& [size, group] : by_size) {
    auto column = [&](double SweepRow::*field) {
      std::vector<double> v;
      for (const auto* r : group) v.push_back(r->*field);
      return v;
    };
    SweepSummary s;
    s.size = size;
    const auto cr = column(&SweepRow::corr_raw);
    const auto cs = column(&SweepRow::corr_smoothed);
    const auto md = column(&SweepRow::mse_data);
    const auto mm = column(&SweepRow::mse_model);
    s.corr_raw_mean = mean(cr);
    s.corr_raw_se = standard_error(cr);
    s.corr_smoothed_mean = mean(cs);
    s.corr_smoothed_se = standard_error(cs);
    s.mse_data_mean = mean(md);
    s.mse_data_se = standard_error(md);
    s.mse_model_mean = mean(mm);
    s.mse_model_se = standard_error(mm);
    out.push_back(s);
  }
  return out;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "size,sim,corr_raw,corr_smoothed,mse_data,mse_model\n";
  const auto old = out.precision(17);
  for (const auto& r : rows) {
    out << r.size << ',' << r.sim << ',' << r.corr_raw << ',' << r.corr_smoothed << ','
        << r.mse_data << ',' << r.mse_model << '\n';
  }
  out.precision(old);
}

}  // namespace srm
