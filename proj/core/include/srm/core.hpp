#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace srm {

inline constexpr std::size_t kNumAgentTypes = 20;
inline constexpr std::size_t kEncodingSize = 2 * kNumAgentTypes + 2;

// Canonical ordering. Every vector indexed by agent uses this order.
enum class AgentType : std::uint8_t {
  Man,
  Woman,
  Pregnant,
  Stroller,
  OldMan,
  OldWoman,
  Boy,
  Girl,
  Homeless,
  LargeWoman,
  LargeMan,
  Criminal,
  MaleExecutive,
  FemaleExecutive,
  FemaleAthlete,
  MaleAthlete,
  FemaleDoctor,
  MaleDoctor,
  Dog,
  Cat,
};

const std::array<AgentType, kNumAgentTypes>& all_agent_types();
std::string_view agent_name(AgentType a);
std::optional<AgentType> parse_agent_type(std::string_view name);
inline std::size_t index_of(AgentType a) { return static_cast<std::size_t>(a); }

enum class Side : std::uint8_t { Left, Right };
enum class Signal : std::uint8_t { Legal, Illegal, None };

inline Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }
// Crossing status of the other side: legal and illegal swap, no signal stays.
Signal opposite(Signal s);

std::string_view side_name(Side s);      // "left" / "right"
std::string_view signal_name(Signal s);  // "legal" / "illegal" / "none"
std::optional<Side> parse_side(std::string_view s);
std::optional<Signal> parse_signal(std::string_view s);

using AgentCounts = std::array<int, kNumAgentTypes>;

int total(const AgentCounts& c);

struct Dilemma {
  std::string id;
  AgentCounts left{};
  AgentCounts right{};
  Signal signal_left = Signal::None;
  Side car_side = Side::Left;

  const AgentCounts& counts(Side s) const { return s == Side::Left ? left : right; }
  Signal signal(Side s) const {
    return s == Side::Left ? signal_left : opposite(signal_left);
  }
  int count(Side s, AgentType a) const { return counts(s)[index_of(a)]; }

  bool operator==(const Dilemma&) const = default;
};

// Same scene ignoring the identifier.
bool same_scene(const Dilemma& a, const Dilemma& b);

struct AggregatedJudgment {
  Dilemma dilemma;
  int n = 0;
  int n_save_left = 0;

  double p_data() const { return static_cast<double>(n_save_left) / n; }
  bool operator==(const AggregatedJudgment&) const = default;
};

// Throws ConfigError unless n > 0, 0 <= n_save_left <= n and counts are non-negative.
void validate(const AggregatedJudgment& j);

struct RegressionPoint {
  double x = 0.0;
  double y = 0.0;
};

using Encoding = std::array<double, kEncodingSize>;

// [0,20) left counts, [20,40) right counts, 40 car side (+1 left, -1 right),
// 41 left crossing signal (+1 legal, 0 none, -1 illegal).
Encoding encode_dilemma(const Dilemma& d);

// Swap sides. The id is kept.
Dilemma mirror(const Dilemma& d);

// 64-bit FNV-1a digest as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace srm
