#include "srm/variational.hpp"

#include <cmath>
#include <random>

#include "srm/error.hpp"

namespace srm {

bool PosteriorSummary::significant(std::size_t i, double z) const {
  const auto k = static_cast<Eigen::Index>(i);
  return std::abs(mean[k]) > z * sd[k];
}

namespace {

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

PosteriorSummary fit_variational_blr(std::span<const AggregatedJudgment> data, const FeatureSet& fs,
                                     const VariationalConfig& cfg) {
  if (data.empty()) throw ConfigError("variational fit needs data");
  if (cfg.prior_sd <= 0) throw ConfigError("prior_sd must be positive");
  if (cfg.steps <= 0 || cfg.learning_rate <= 0) throw ConfigError("steps and learning_rate must be positive");

  const DesignMatrix dm = build_design(data, fs);
  const Eigen::MatrixXd diff_sq = dm.diff.cwiseProduct(dm.diff);
  const Eigen::Index k = dm.diff.cols();
  const Eigen::Index rows = dm.diff.rows();
  const double prior_var = cfg.prior_sd * cfg.prior_sd;

  PosteriorSummary post;
  post.features = fs;
  if (k == 0) {
    post.mean = post.sd = Eigen::VectorXd();
    return post;
  }

  // Variational parameters: mean mu and log standard deviation rho.
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd rho = Eigen::VectorXd::Constant(k, std::log(cfg.prior_sd));
  Eigen::VectorXd m_mu = Eigen::VectorXd::Zero(k), v_mu = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd m_rho = Eigen::VectorXd::Zero(k), v_rho = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd sum_mu = Eigen::VectorXd::Zero(k), sum_rho = Eigen::VectorXd::Zero(k);
  int averaged = 0;
  const int average_from = static_cast<int>(cfg.steps * (1.0 - cfg.averaging_fraction));

  // Likelihood gradients are scaled to one judgment so that Adam sees O(1) steps.
  const double scale = 1.0 / std::max(1.0, dm.n.sum());
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;

  Eigen::VectorXd noise(rows), g_a(rows);
  for (int t = 1; t <= cfg.steps; ++t) {
    const Eigen::VectorXd sigma = rho.array().exp();
    const Eigen::VectorXd var = sigma.cwiseProduct(sigma);
    const Eigen::VectorXd a_mean = dm.diff * mu;
    const Eigen::VectorXd a_sd = (diff_sq * var).cwiseSqrt();
    for (Eigen::Index i = 0; i < rows; ++i) noise[i] = normal(rng);

    // d loglik / d a for a sampled value difference a = a_mean + a_sd * noise.
    Eigen::VectorXd g_noise_term(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double a = a_mean[i] + a_sd[i] * noise[i];
      g_a[i] = dm.n_save_left[i] - dm.n[i] * logistic(a);
      g_noise_term[i] = a_sd[i] > 0 ? g_a[i] * noise[i] / a_sd[i] : 0.0;
    }
    // Negative ELBO gradients (minimised).
    Eigen::VectorXd grad_mu = -(dm.diff.transpose() * g_a) * scale + scale * mu / prior_var;
    // d a_sd / d sigma_j = sigma_j * diff_j^2 / a_sd; chain through sigma = exp(rho).
    Eigen::VectorXd grad_sigma_lik = (diff_sq.transpose() * g_noise_term).cwiseProduct(sigma);
    Eigen::VectorXd grad_rho =
        -grad_sigma_lik.cwiseProduct(sigma) * scale +
        scale * (var.array() / prior_var - 1.0).matrix();

    if (!grad_mu.allFinite() || !grad_rho.allFinite()) {
      throw DivergenceError("variational fit diverged; lower the learning rate");
    }
    const double lr = cfg.learning_rate / std::sqrt(1.0 + t / 200.0);
    const double bc1 = 1.0 - std::pow(b1, t);
    const double bc2 = 1.0 - std::pow(b2, t);
    m_mu = b1 * m_mu + (1 - b1) * grad_mu;
    v_mu = b2 * v_mu + (1 - b2) * grad_mu.cwiseProduct(grad_mu);
    m_rho = b1 * m_rho + (1 - b1) * grad_rho;
    v_rho = b2 * v_rho + (1 - b2) * grad_rho.cwiseProduct(grad_rho);
    mu.array() -= lr * (m_mu.array() / bc1) / ((v_mu.array() / bc2).sqrt() + eps);
    rho.array() -= lr * (m_rho.array() / bc1) / ((v_rho.array() / bc2).sqrt() + eps);

    if (t > average_from) {
      sum_mu += mu;
      sum_rho += rho;
      ++averaged;
    }
  }
  post.mean = sum_mu / averaged;
  post.sd = (sum_rho / averaged).array().exp();
  if (!post.mean.allFinite() || !post.sd.allFinite()) {
    throw DivergenceError("variational posterior is not finite");
  }
  return post;
}

SelectionResult selection_loop(std::span<const AggregatedJudgment> train,
                               std::span<const AggregatedJudgment> evaluation,
                               const FeatureSet& base_fs, const SelectionConfig& cfg) {
  if (train.empty()) throw ConfigError("selection_loop needs training data");
  SelectionResult result;
  FeatureSet current = expand_interactions(base_fs, cfg.max_order);
  if (cfg.drop_constant_columns) {
    std::vector<Dilemma> dilemmas;
    dilemmas.reserve(train.size());
    for (const auto& j : train) dilemmas.push_back(j.dilemma);
    current = drop_constant_columns(current, dilemmas);
  }

  for (int round = 0; round < cfg.max_rounds; ++round) {
    if (current.empty()) {
      result.warnings.push_back("every feature was dropped");
      result.posterior = PosteriorSummary{current, {}, {}};
      break;
    }
    VariationalConfig vcfg = cfg.variational;
    vcfg.seed = cfg.variational.seed + static_cast<std::uint64_t>(round);
    PosteriorSummary post = fit_variational_blr(train, current, vcfg);

    SelectionRound r;
    r.n_features = current.size();
    if (!evaluation.empty()) {
      const auto p = predict_all(post.point_model(), evaluation);
      r.metrics = evaluate(p, evaluation, current.size());
    }
    result.trajectory.push_back(r);

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (post.significant(i, cfg.z)) keep.push_back(i);
    }
    result.posterior = std::move(post);
    if (keep.size() == current.size()) break;
    current = current.subset(keep);
    if (current.empty()) {
      result.warnings.push_back("every feature was dropped");
      result.posterior = PosteriorSummary{current, {}, {}};
      SelectionRound last;
      if (!evaluation.empty()) {
        last.metrics = evaluate(std::vector<double>(evaluation.size(), 0.5), evaluation, 0);
      }
      result.trajectory.push_back(last);
      break;
    }
  }
  if (!current.empty() && !(result.posterior.features == current)) {
    // max_rounds ended right after a pruning step; fit the surviving set once more.
    VariationalConfig vcfg = cfg.variational;
    vcfg.seed = cfg.variational.seed + static_cast<std::uint64_t>(cfg.max_rounds);
    result.posterior = fit_variational_blr(train, current, vcfg);
    SelectionRound r;
    r.n_features = current.size();
    if (!evaluation.empty()) {
      r.metrics = evaluate(predict_all(result.posterior.point_model(), evaluation), evaluation,
                           current.size());
    }
    result.trajectory.push_back(r);
  }
  result.final_set = current;
  return result;
}

nlohmann::ordered_json to_json(const PosteriorSummary& p) {
  auto features = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < p.features.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    features.push_back({{"name", p.features[i].name}, {"mean", p.mean[k]}, {"sd", p.sd[k]}});
  }
  return {{"feature_hash", p.features.hash()}, {"features", std::move(features)}};
}

}  // namespace srm
