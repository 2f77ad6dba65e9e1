#include "srm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "srm/checkpoint.hpp"
#include "srm/error.hpp"
#include "srm/features.hpp"

namespace srm {

double polynomial_truth(double x) {
  const double a = x - 2.0;
  const double b = x + 2.0;
  return 3.0 * x * a * a * b * b * (x + 1.0);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<RegressionPoint> gen_polynomial_dataset(std::size_t n, std::uint64_t seed,
                                                    const PolynomialConfig& cfg) {
  if (cfg.noise_sd < 0) throw ConfigError("noise_sd must be non-negative");
  if (!(cfg.x_min < cfg.x_max)) throw ConfigError("empty x domain");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(cfg.x_min, cfg.x_max);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<RegressionPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::round(ux(rng) * 1000.0) / 1000.0;
    const double eps = noise(rng);
    out.push_back({x, polynomial_truth(x) + cfg.noise_sd * eps});
  }
  return out;
}

void PopulationConfig::validate() const {
  if (min_agents_per_side < 1 || max_agents_per_side < min_agents_per_side) {
    throw ConfigError("agents_per_side range is empty or below 1");
  }
  if (min_judgments < 1 || max_judgments < min_judgments) {
    throw ConfigError("judgments_per_dilemma range is empty or below 1");
  }
  if (axis_structured_fraction < 0 || axis_structured_fraction > 1) {
    throw ConfigError("axis_structured_fraction must lie in [0, 1]");
  }
  const double s = p_signal_legal + p_signal_illegal + p_signal_none;
  if (p_signal_legal < 0 || p_signal_illegal < 0 || p_signal_none < 0 || std::abs(s - 1.0) > 1e-9) {
    throw ConfigError("signal_mix probabilities must be non-negative and sum to 1");
  }
  for (const auto& a : axes) find_axis(a);
}

nlohmann::json population_config_to_json(const PopulationConfig& cfg) {
  return {
      {"n_dilemmas", cfg.n_dilemmas},
      {"agents_per_side", {cfg.min_agents_per_side, cfg.max_agents_per_side}},
      {"judgments_per_dilemma", {cfg.min_judgments, cfg.max_judgments}},
      {"axis_structured_fraction", cfg.axis_structured_fraction},
      {"axes", cfg.axes},
      {"signal_mix",
       {{"legal", cfg.p_signal_legal}, {"illegal", cfg.p_signal_illegal}, {"none", cfg.p_signal_none}}},
  };
}

PopulationConfig population_config_from_json(const nlohmann::json& j) {
  require_known_keys(j,
                     {"n_dilemmas", "agents_per_side", "judgments_per_dilemma",
                      "axis_structured_fraction", "axes", "signal_mix"},
                     "population config");
  PopulationConfig cfg;
  try {
    cfg.n_dilemmas = j.value("n_dilemmas", cfg.n_dilemmas);
    if (j.contains("agents_per_side")) {
      cfg.min_agents_per_side = j.at("agents_per_side").at(0).get<int>();
      cfg.max_agents_per_side = j.at("agents_per_side").at(1).get<int>();
    }
    if (j.contains("judgments_per_dilemma")) {
      cfg.min_judgments = j.at("judgments_per_dilemma").at(0).get<int>();
      cfg.max_judgments = j.at("judgments_per_dilemma").at(1).get<int>();
    }
    cfg.axis_structured_fraction = j.value("axis_structured_fraction", cfg.axis_structured_fraction);
    cfg.axes = j.value("axes", cfg.axes);
    if (j.contains("signal_mix")) {
      const auto& m = j.at("signal_mix");
      cfg.p_signal_legal = m.at("legal").get<double>();
      cfg.p_signal_illegal = m.at("illegal").get<double>();
      cfg.p_signal_none = m.at("none").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("population config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

namespace {

using Rng = std::mt19937_64;

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

void add_random(AgentCounts& c, Rng& rng, const std::vector<AgentType>& pool, int k) {
  for (int i = 0; i < k; ++i) {
    c[index_of(pool[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(pool.size()) - 1))])]++;
  }
}

const std::vector<AgentType>& every_agent() {
  static const std::vector<AgentType> kAll(all_agent_types().begin(), all_agent_types().end());
  return kAll;
}

Signal draw_signal(Rng& rng, const PopulationConfig& cfg) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < cfg.p_signal_legal) return Signal::Legal;
  if (u < cfg.p_signal_legal + cfg.p_signal_illegal) return Signal::Illegal;
  return Signal::None;
}

Dilemma structured(Rng& rng, const PopulationConfig& cfg, const Axis& axis) {
  const int max = cfg.max_agents_per_side;
  const int min = cfg.min_agents_per_side;
  Dilemma d;
  AgentCounts favored{}, disfavored{};
  AgentCounts shared{};
  if (axis.count_contrast) {
    // The smaller side is entirely shared; the larger adds 1.. extra agents.
    const int small = uniform_int(rng, std::max(1, min), max - 1);
    const int extra = uniform_int(rng, 1, max - small);
    add_random(shared, rng, every_agent(), small);
    add_random(favored, rng, every_agent(), extra);
  } else {
    const int fav = uniform_int(rng, 1, max);
    const int dis = uniform_int(rng, 1, max);
    const int room = max - std::max(fav, dis);
    const int need = std::max(0, min - std::min(fav, dis));
    add_random(shared, rng, every_agent(), uniform_int(rng, need, std::max(need, room)));
    add_random(favored, rng, axis.favored, fav);
    add_random(disfavored, rng, axis.disfavored, dis);
  }
  const bool favored_left = uniform_int(rng, 0, 1) == 0;
  for (std::size_t i = 0; i < kNumAgentTypes; ++i) {
    d.left[i] = shared[i] + (favored_left ? favored[i] : disfavored[i]);
    d.right[i] = shared[i] + (favored_left ? disfavored[i] : favored[i]);
  }
  return d;
}

Dilemma unstructured(Rng& rng, const PopulationConfig& cfg) {
  Dilemma d;
  add_random(d.left, rng, every_agent(), uniform_int(rng, cfg.min_agents_per_side, cfg.max_agents_per_side));
  add_random(d.right, rng, every_agent(), uniform_int(rng, cfg.min_agents_per_side, cfg.max_agents_per_side));
  return d;
}

}  // namespace

std::vector<Dilemma> sample_dilemma_population(const PopulationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<const Axis*> axes;
  if (cfg.axes.empty()) {
    for (const auto& a : axis_catalog()) axes.push_back(&a);
  } else {
    for (const auto& name : cfg.axes) axes.push_back(&find_axis(name));
  }
  if (cfg.max_agents_per_side < 2) {
    std::erase_if(axes, [](const Axis* a) { return a->count_contrast; });
  }
  if (axes.empty() && cfg.axis_structured_fraction > 0) {
    throw ConfigError("no usable axis for structured sampling");
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::set<std::tuple<AgentCounts, AgentCounts, Signal, Side>> seen;
  std::vector<Dilemma> out;
  out.reserve(cfg.n_dilemmas);
  const std::size_t max_attempts = 1000 + 200 * cfg.n_dilemmas;
  std::size_t attempts = 0;
  while (out.size() < cfg.n_dilemmas) {
    if (++attempts > max_attempts) {
      throw ConfigError("could not draw " + std::to_string(cfg.n_dilemmas) +
                        " unique dilemmas; widen agents_per_side or lower n_dilemmas");
    }
    Dilemma d;
    if (unit(rng) < cfg.axis_structured_fraction) {
      const auto& axis = *axes[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(axes.size()) - 1))];
      d = structured(rng, cfg, axis);
    } else {
      d = unstructured(rng, cfg);
    }
    d.signal_left = draw_signal(rng, cfg);
    d.car_side = uniform_int(rng, 0, 1) == 0 ? Side::Left : Side::Right;
    if (!seen.emplace(d.left, d.right, d.signal_left, d.car_side).second) continue;
    char id[32];
    std::snprintf(id, sizeof id, "d%06zu", out.size());
    d.id = id;
    out.push_back(std::move(d));
  }
  return out;
}

AggregatedJudgment sample_judgments(const ChoiceModel& truth, const Dilemma& d, int n,
                                    std::uint64_t seed) {
  if (n <= 0) throw ConfigError("judgment count must be positive");
  const double p = truth.predict_save_left(d);
  Rng rng(seed);
  std::binomial_distribution<int> draw(n, p);
  return {d, n, draw(rng)};
}

std::vector<AggregatedJudgment> sample_dataset(const ChoiceModel& truth,
                                               std::span<const Dilemma> dilemmas,
                                               const PopulationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<AggregatedJudgment> out;
  out.reserve(dilemmas.size());
  const double lo = std::log(static_cast<double>(cfg.min_judgments));
  const double hi = std::log(static_cast<double>(cfg.max_judgments) + 1.0);
  for (std::size_t i = 0; i < dilemmas.size(); ++i) {
    Rng rng(derive_seed(seed, i));
    const double u = std::uniform_real_distribution<double>(lo, hi)(rng);
    const int n = std::clamp(static_cast<int>(std::floor(std::exp(u))), cfg.min_judgments,
                             cfg.max_judgments);
    out.push_back(sample_judgments(truth, dilemmas[i], n, rng()));
  }
  return out;
}

}  // namespace srm
