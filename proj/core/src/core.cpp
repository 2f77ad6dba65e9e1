#include "srm/core.hpp"

#include <cstdio>
#include <numeric>

#include "srm/error.hpp"

namespace srm {

namespace {

constexpr std::array<std::string_view, kNumAgentTypes> kAgentNames = {
    "Man",           "Woman",           "Pregnant",      "Stroller",
    "OldMan",        "OldWoman",        "Boy",           "Girl",
    "Homeless",      "LargeWoman",      "LargeMan",      "Criminal",
    "MaleExecutive", "FemaleExecutive", "FemaleAthlete", "MaleAthlete",
    "FemaleDoctor",  "MaleDoctor",      "Dog",           "Cat",
};

}  // namespace

const std::array<AgentType, kNumAgentTypes>& all_agent_types() {
  static const auto kAll = [] {
    std::array<AgentType, kNumAgentTypes> a{};
    for (std::size_t i = 0; i < kNumAgentTypes; ++i) a[i] = static_cast<AgentType>(i);
    return a;
  }();
  return kAll;
}

std::string_view agent_name(AgentType a) { return kAgentNames[index_of(a)]; }

std::optional<AgentType> parse_agent_type(std::string_view name) {
  for (std::size_t i = 0; i < kNumAgentTypes; ++i) {
    if (kAgentNames[i] == name) return static_cast<AgentType>(i);
  }
  return std::nullopt;
}

Signal opposite(Signal s) {
  switch (s) {
    case Signal::Legal:
      return Signal::Illegal;
    case Signal::Illegal:
      return Signal::Legal;
    case Signal::None:
      break;
  }
  return Signal::None;
}

std::string_view side_name(Side s) { return s == Side::Left ? "left" : "right"; }

std::string_view signal_name(Signal s) {
  switch (s) {
    case Signal::Legal:
      return "legal";
    case Signal::Illegal:
      return "illegal";
    case Signal::None:
      break;
  }
  return "none";
}

std::optional<Side> parse_side(std::string_view s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  return std::nullopt;
}

std::optional<Signal> parse_signal(std::string_view s) {
  if (s == "legal") return Signal::Legal;
  if (s == "illegal") return Signal::Illegal;
  if (s == "none") return Signal::None;
  return std::nullopt;
}

int total(const AgentCounts& c) { return std::accumulate(c.begin(), c.end(), 0); }

bool same_scene(const Dilemma& a, const Dilemma& b) {
  return a.left == b.left && a.right == b.right && a.signal_left == b.signal_left &&
         a.car_side == b.car_side;
}

void validate(const AggregatedJudgment& j) {
  if (j.n <= 0) throw ConfigError("judgment '" + j.dilemma.id + "': n must be positive");
  if (j.n_save_left < 0 || j.n_save_left > j.n) {
    throw ConfigError("judgment '" + j.dilemma.id + "': n_save_left outside [0, n]");
  }
  for (Side s : {Side::Left, Side::Right}) {
    for (int c : j.dilemma.counts(s)) {
      if (c < 0) throw ConfigError("judgment '" + j.dilemma.id + "': negative agent count");
    }
  }
}

Encoding encode_dilemma(const Dilemma& d) {
  Encoding e{};
  for (std::size_t i = 0; i < kNumAgentTypes; ++i) {
    e[i] = d.left[i];
    e[kNumAgentTypes + i] = d.right[i];
  }
  e[2 * kNumAgentTypes] = d.car_side == Side::Left ? 1.0 : -1.0;
  switch (d.signal_left) {
    case Signal::Legal:
      e[2 * kNumAgentTypes + 1] = 1.0;
      break;
    case Signal::Illegal:
      e[2 * kNumAgentTypes + 1] = -1.0;
      break;
    case Signal::None:
      e[2 * kNumAgentTypes + 1] = 0.0;
      break;
  }
  return e;
}

Dilemma mirror(const Dilemma& d) {
  Dilemma m;
  m.id = d.id;
  m.left = d.right;
  m.right = d.left;
  m.signal_left = opposite(d.signal_left);
  m.car_side = opposite(d.car_side);
  return m;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace srm
