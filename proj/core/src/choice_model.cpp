#include "srm/choice_model.hpp"

#include <algorithm>
#include <cmath>

#include "srm/error.hpp"

namespace srm {

ChoiceModel::ChoiceModel(FeatureSet fs)
    : features_(std::move(fs)), weights_(Eigen::VectorXd::Zero(features_.size())) {}

ChoiceModel::ChoiceModel(FeatureSet fs, Eigen::VectorXd weights)
    : features_(std::move(fs)), weights_(std::move(weights)) {
  if (static_cast<std::size_t>(weights_.size()) != features_.size()) {
    throw ConfigError("weight vector has " + std::to_string(weights_.size()) +
                      " entries for " + std::to_string(features_.size()) + " features");
  }
  if (!weights_.allFinite()) throw ConfigError("non-finite model weight");
}

double ChoiceModel::side_value(std::span<const double> x_side) const {
  if (x_side.size() != features_.size()) {
    throw ConfigError("side vector length " + std::to_string(x_side.size()) +
                      " does not match " + std::to_string(features_.size()) + " weights");
  }
  double v = 0.0;
  for (std::size_t i = 0; i < x_side.size(); ++i) v += weights_[i] * x_side[i];
  return v;
}

double softmax_left(double v_left, double v_right) {
  const double m = std::max(v_left, v_right);
  const double el = std::exp(v_left - m);
  const double er = std::exp(v_right - m);
  return el / (el + er);
}

double ChoiceModel::predict_save_left(const Dilemma& d) const {
  const auto x = evaluate_features(features_, d);
  return softmax_left(side_value(x.left), side_value(x.right));
}

DesignMatrix build_design(std::span<const AggregatedJudgment> data, const FeatureSet& fs) {
  DesignMatrix dm;
  const auto rows = static_cast<Eigen::Index>(data.size());
  const auto cols = static_cast<Eigen::Index>(fs.size());
  dm.diff.resize(rows, cols);
  dm.n.resize(rows);
  dm.n_save_left.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& j = data[static_cast<std::size_t>(r)];
    const auto x = evaluate_features(fs, j.dilemma);
    for (Eigen::Index c = 0; c < cols; ++c) {
      dm.diff(r, c) = x.left[static_cast<std::size_t>(c)] - x.right[static_cast<std::size_t>(c)];
    }
    dm.n[r] = j.n;
    dm.n_save_left[r] = j.n_save_left;
  }
  return dm;
}

namespace {

// log(1 + exp(-z)) without overflow.
double log1p_exp_neg(double z) {
  return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Objective {
  const DesignMatrix& dm;
  double l2;

  // NLL without clamping; the clamp only guards reporting.
  double nll(const Eigen::VectorXd& w) const {
    const Eigen::VectorXd z = dm.diff * w;
    double total = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      total += dm.n_save_left[i] * log1p_exp_neg(z[i]) +
               (dm.n[i] - dm.n_save_left[i]) * log1p_exp_neg(-z[i]);
    }
    return total;
  }
  double value(const Eigen::VectorXd& w) const { return nll(w) + 0.5 * l2 * w.squaredNorm(); }

  Eigen::VectorXd gradient(const Eigen::VectorXd& w, Eigen::VectorXd* curvature) const {
    const Eigen::VectorXd z = dm.diff * w;
    Eigen::VectorXd resid(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double p = logistic(z[i]);
      resid[i] = dm.n[i] * p - dm.n_save_left[i];
      if (curvature) (*curvature)[i] = dm.n[i] * p * (1.0 - p);
    }
    return dm.diff.transpose() * resid + l2 * w;
  }
};

}  // namespace

FitResult fit_choice_model(std::span<const AggregatedJudgment> data, const FeatureSet& fs,
                           const FitConfig& cfg) {
  if (data.empty()) throw ConfigError("cannot fit a choice model to an empty dataset");
  if (cfg.step_size <= 0) throw ConfigError("step_size must be positive");
  if (cfg.l2_penalty < 0) throw ConfigError("l2_penalty must be non-negative");

  FitResult result;
  const DesignMatrix dm = build_design(data, fs);
  const double judgments = dm.n.sum();
  const Eigen::Index k = dm.diff.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(k);

  if (k > 0 && dm.diff.cwiseAbs().maxCoeff() == 0.0) {
    result.warnings.push_back(
        "singular fit: no feature differs between sides anywhere in the data");
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (dm.diff.col(c).isZero(0.0)) {
      result.warnings.push_back("feature '" + fs[static_cast<std::size_t>(c)].name +
                                "' never differs between sides; its weight stays at 0");
    }
  }

  const Objective obj{dm, cfg.l2_penalty};
  double f = obj.value(w);
  if (!std::isfinite(f)) throw DivergenceError("non-finite initial loss");

  // Tiny ridge keeps the Newton system solvable for duplicated columns.
  const double ridge = 1e-9 * std::max(1.0, judgments);
  bool rank_warned = false;
  for (int it = 0; it < cfg.max_epochs && k > 0; ++it) {
    Eigen::VectorXd curvature(dm.diff.rows());
    const Eigen::VectorXd g = obj.gradient(w, cfg.method == FitMethod::Newton ? &curvature : nullptr);
    Eigen::VectorXd direction;
    double step = 1.0;
    if (cfg.method == FitMethod::Newton) {
      Eigen::MatrixXd h = dm.diff.transpose() * curvature.asDiagonal() * dm.diff;
      h.diagonal().array() += cfg.l2_penalty + ridge;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      direction = -ldlt.solve(g);
      if (!rank_warned && ldlt.info() == Eigen::Success) {
        const auto dvals = ldlt.vectorD().cwiseAbs();
        if (dvals.minCoeff() < 1e-7 * dvals.maxCoeff()) {
          result.warnings.push_back("collinear features: the fit is not identifiable");
          rank_warned = true;
        }
      }
      if (ldlt.info() != Eigen::Success || !direction.allFinite() || direction.dot(g) >= 0) {
        direction = -g;
        step = cfg.step_size / std::max(1.0, judgments);
      }
    } else {
      direction = -g;
      step = cfg.step_size / std::max(1.0, judgments);
    }

    // Backtracking (Armijo) so the objective never increases.
    const double slope = g.dot(direction);
    Eigen::VectorXd candidate;
    double f_new = f;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      candidate = w + step * direction;
      f_new = obj.value(candidate);
      if (!std::isfinite(f_new)) {
        if (bt == 59) {
          throw DivergenceError("non-finite loss during choice-model fit; try a smaller step_size");
        }
      } else if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++result.iterations;
    if (!accepted) {
      result.converged = true;
      break;
    }
    const double improvement = (f - f_new) / std::max(1.0, judgments);
    w = candidate;
    f = f_new;
    if (improvement < cfg.tolerance) {
      result.converged = true;
      break;
    }
  }
  if (k == 0) result.converged = true;
  if (!w.allFinite()) throw DivergenceError("non-finite weights; try a smaller step_size");

  result.model = ChoiceModel(fs, w);
  result.nll = obj.nll(w);
  return result;
}

std::vector<double> predict_all(const ChoiceModel& m, std::span<const AggregatedJudgment> data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& j : data) out.push_back(m.predict_save_left(j.dilemma));
  return out;
}

double nll_from_predictions(std::span<const double> p, std::span<const AggregatedJudgment> data) {
  if (p.size() != data.size()) throw ConfigError("predictions and data differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double q = std::clamp(p[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    total += -data[i].n_save_left * std::log(q) - (data[i].n - data[i].n_save_left) * std::log1p(-q);
  }
  return total;
}

double nll(const ChoiceModel& m, std::span<const AggregatedJudgment> data) {
  return nll_from_predictions(predict_all(m, data), data);
}

}  // namespace srm
