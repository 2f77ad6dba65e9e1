#include "srm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "srm/choice_model.hpp"
#include "srm/error.hpp"
#include "srm/stats.hpp"

namespace srm {

namespace {

void check_aligned(std::span<const double> p, std::span<const AggregatedJudgment> data) {
  if (p.size() != data.size()) throw ConfigError("predictions are not aligned with the data");
}

}  // namespace

Split binned_split(std::span<const AggregatedJudgment> data, std::uint64_t seed) {
  if (data.size() < 5) throw ConfigError("binned_split needs at least five dilemmas");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (data[a].n != data[b].n) return data[a].n > data[b].n;
    return data[a].dilemma.id < data[b].dilemma.id;
  });

  std::mt19937_64 rng(seed);
  std::vector<bool> is_test(data.size(), false);
  const std::size_t full_bins = data.size() / 5;
  for (std::size_t b = 0; b < full_bins; ++b) {
    const auto pick = std::uniform_int_distribution<std::size_t>(0, 4)(rng);
    is_test[order[5 * b + pick]] = true;
  }
  std::bernoulli_distribution partial(0.2);
  for (std::size_t i = 5 * full_bins; i < data.size(); ++i) is_test[order[i]] = partial(rng);

  Split split;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (is_test[i] ? split.test : split.train).push_back(data[i]);
  }
  return split;
}

double accuracy(std::span<const double> p, std::span<const AggregatedJudgment> data) {
  check_aligned(p, data);
  double correct = 0.0;
  double n = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& j = data[i];
    if (p[i] > 0.5) {
      correct += j.n_save_left;
    } else if (p[i] < 0.5) {
      correct += j.n - j.n_save_left;
    } else {
      correct += 0.5 * j.n;
    }
    n += j.n;
  }
  return n > 0 ? correct / n : 0.0;
}

double auc(std::span<const double> p, std::span<const AggregatedJudgment> data) {
  check_aligned(p, data);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

  // Walk tie groups in ascending score; each positive beats every negative in
  // strictly lower groups and ties with the negatives in its own group.
  double pos_total = 0.0, neg_total = 0.0;
  for (const auto& j : data) {
    pos_total += j.n_save_left;
    neg_total += j.n - j.n_save_left;
  }
  if (pos_total == 0.0 || neg_total == 0.0) {
    throw NumericError("AUC is undefined when every judgment has the same label");
  }
  long double wins = 0.0L;
  double neg_below = 0.0;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t h = g;
    double pos = 0.0, neg = 0.0;
    while (h < order.size() && p[order[h]] == p[order[g]]) {
      pos += data[order[h]].n_save_left;
      neg += data[order[h]].n - data[order[h]].n_save_left;
      ++h;
    }
    wins += static_cast<long double>(pos) * neg_below + 0.5L * pos * neg;
    neg_below += neg;
    g = h;
  }
  return static_cast<double>(wins / (static_cast<long double>(pos_total) * neg_total));
}

std::int64_t total_judgments(std::span<const AggregatedJudgment> data) {
  std::int64_t n = 0;
  for (const auto& j : data) n += j.n;
  return n;
}

double normalized_aic(std::span<const double> p, std::span<const AggregatedJudgment> data,
                      std::size_t n_params) {
  const auto n = total_judgments(data);
  if (n == 0) throw ConfigError("normalized AIC needs at least one judgment");
  return (2.0 * static_cast<double>(n_params) + 2.0 * nll_from_predictions(p, data)) /
         static_cast<double>(n);
}

double empirical_upper_bound(std::span<const AggregatedJudgment> data) {
  if (data.empty()) throw ConfigError("empirical_upper_bound needs data");
  double best = 0.0;
  for (const auto& j : data) best += std::max(j.n_save_left, j.n - j.n_save_left);
  return best / static_cast<double>(total_judgments(data));
}

MetricReport evaluate(std::span<const double> p, std::span<const AggregatedJudgment> data,
                      std::size_t n_params) {
  MetricReport m;
  m.accuracy = accuracy(p, data);
  m.auc = auc(p, data);
  m.n_test_judgments = total_judgments(data);
  const double total_nll = nll_from_predictions(p, data);
  m.nll_per_judgment = total_nll / static_cast<double>(m.n_test_judgments);
  m.normalized_aic = (2.0 * static_cast<double>(n_params) + 2.0 * total_nll) /
                     static_cast<double>(m.n_test_judgments);
  m.n_params = n_params;
  return m;
}

nlohmann::ordered_json to_json(const MetricReport& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy;
  j["auc"] = m.auc;
  j["normalized_aic"] = m.normalized_aic;
  j["nll_per_judgment"] = m.nll_per_judgment;
  j["n_params"] = m.n_params;
  j["n_test_judgments"] = m.n_test_judgments;
  return j;
}

MetricReport metric_report_from_json(const nlohmann::json& j) {
  MetricReport m;
  m.accuracy = j.at("accuracy").get<double>();
  m.auc = j.at("auc").get<double>();
  m.normalized_aic = j.at("normalized_aic").get<double>();
  m.nll_per_judgment = j.at("nll_per_judgment").get<double>();
  m.n_params = j.at("n_params").get<std::size_t>();
  m.n_test_judgments = j.at("n_test_judgments").get<std::int64_t>();
  return m;
}

Calibration calibration(std::span<const double> p, std::span<const AggregatedJudgment> data,
                        int min_n) {
  check_aligned(p, data);
  std::vector<double> x, y, w;
  Calibration cal;
  cal.bins.resize(10);
  std::vector<double> sum_pred(10, 0.0), sum_obs(10, 0.0);
  bool any = false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    x.push_back(p[i]);
    y.push_back(data[i].p_data());
    w.push_back(data[i].n);
    if (data[i].n < min_n) continue;
    any = true;
    const auto b = std::min<std::size_t>(9, static_cast<std::size_t>(p[i] * 10.0));
    sum_pred[b] += p[i] * data[i].n;
    sum_obs[b] += data[i].n_save_left;
    cal.bins[b].judgments += data[i].n;
    cal.bins[b].dilemmas += 1;
  }
  if (!any) throw NumericError("no dilemma has at least " + std::to_string(min_n) + " judgments");
  const Line line = fit_line(x, y, w);
  cal.slope = line.slope;
  cal.intercept = line.intercept;
  for (std::size_t b = 0; b < 10; ++b) {
    if (cal.bins[b].judgments == 0) continue;
    const auto n = static_cast<double>(cal.bins[b].judgments);
    cal.bins[b].mean_predicted = sum_pred[b] / n;
    cal.bins[b].mean_observed = sum_obs[b] / n;
  }
  return cal;
}

}  // namespace srm
