#pragma once

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "srm/choice_model.hpp"
#include "srm/core.hpp"
#include "srm/features.hpp"

namespace fixtures {

using Agents = std::initializer_list<std::pair<srm::AgentType, int>>;

inline srm::AgentCounts counts(Agents agents) {
  srm::AgentCounts c{};
  for (const auto& [a, k] : agents) c[srm::index_of(a)] += k;
  return c;
}

inline srm::Dilemma dilemma(Agents left, Agents right, srm::Signal signal_left = srm::Signal::None,
                            srm::Side car = srm::Side::Left, std::string id = "d") {
  srm::Dilemma d;
  d.id = std::move(id);
  d.left = counts(left);
  d.right = counts(right);
  d.signal_left = signal_left;
  d.car_side = car;
  return d;
}

// The dilemma pictured in the paper's first figure.
inline srm::Dilemma figure_one() {
  using A = srm::AgentType;
  return dilemma({{A::Girl, 1}, {A::OldWoman, 1}, {A::Dog, 1}},
                 {{A::Stroller, 1}, {A::Woman, 1}, {A::Dog, 1}}, srm::Signal::Illegal,
                 srm::Side::Left, "fig1");
}

inline srm::AggregatedJudgment judgment(srm::Dilemma d, int n, int k) {
  return srm::AggregatedJudgment{std::move(d), n, k};
}

// Hybrid weights used across tests as a plausible ground truth.
inline Eigen::VectorXd hybrid_truth_weights() {
  Eigen::VectorXd w(22);
  w << 0.30, 0.35, 0.55, 0.60, -0.20, -0.15, 0.70, 0.75, -0.30, 0.05, 0.00, -0.55, 0.15, 0.20,
      0.25, 0.20, 0.35, 0.30, -0.80, -0.85, -0.35, -0.45;
  return w;
}

}  // namespace fixtures
