#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srm/core.hpp"

namespace srm {

// A named contrast between two disjoint agent categories. The first-named
// category of an axis is its "favored" role, the second its "disfavored" role.
// more_vs_less is a pure count contrast and has empty categories.
struct Axis {
  std::string name;
  std::vector<AgentType> favored;
  std::vector<AgentType> disfavored;
  bool count_contrast = false;
};

const std::vector<Axis>& axis_catalog();
// Throws ConfigError for names not in the catalog.
const Axis& find_axis(std::string_view name);

// Removes the largest common sub-multiset from both sides, then returns the
// side whose residual lies entirely in the favored category while the other
// residual lies entirely in the disfavored one. Both residuals must be non-empty
// except for count contrasts, where the favored side is the only non-empty one.
std::optional<Side> classify_axis(const Dilemma& d, const Axis& axis);
std::optional<Side> classify_axis(const Dilemma& d, std::string_view axis);

enum class AtomKind {
  Intervention,
  SignalLegal,
  SignalIllegal,
  SignalNone,
  AxisFavored,
  AxisDisfavored,
};

struct Atom {
  AtomKind kind = AtomKind::Intervention;
  std::string axis;  // only for the axis atoms

  std::string to_string() const;
  bool operator==(const Atom&) const = default;
};

// Sparing `side` requires swerving iff the car is on the other side.
bool requires_intervention(const Dilemma& d, Side side);
bool holds(const Atom& atom, const Dilemma& d, Side side);

struct FeatureDef {
  enum class Kind { Count, Indicator, Product };

  Kind kind = Kind::Count;
  std::string name;
  AgentType agent = AgentType::Man;   // Count
  std::vector<Atom> conjunction;      // Indicator; a single atom or an `and`
  std::vector<FeatureDef> factors;    // Product of two or three base features

  static FeatureDef count(AgentType a);
  static FeatureDef indicator(std::string name, std::vector<Atom> atoms);
  static FeatureDef product(std::span<const FeatureDef> factors);

  bool operator==(const FeatureDef&) const = default;
};

inline constexpr std::size_t kMaxConjunction = 3;

// Ordered list of uniquely-named features. Model weights are positional.
class FeatureSet {
 public:
  FeatureSet() = default;

  // Throws ConfigError on a duplicate name.
  void add(FeatureDef def);

  std::size_t size() const { return defs_.size(); }
  bool empty() const { return defs_.empty(); }
  const FeatureDef& operator[](std::size_t i) const { return defs_[i]; }
  auto begin() const { return defs_.begin(); }
  auto end() const { return defs_.end(); }
  std::optional<std::size_t> find(std::string_view name) const;
  std::vector<std::string> names() const;

  // Canonical text in the feature-spec grammar; parses back to an equal set.
  std::string to_text() const;
  // 64-bit FNV-1a of to_text(), as 16 hex digits.
  std::string hash() const;

  // Keeps the features at the given positions, in order.
  FeatureSet subset(std::span<const std::size_t> keep) const;

  bool operator==(const FeatureSet&) const = default;

 private:
  std::vector<FeatureDef> defs_;
};

// Line-oriented grammar, `#` starts a comment:
//   count <AgentType>
//   indicator <name> <atom>
//   indicator <name> (and <atom> <atom> [<atom>])
//   product <name> <factor> <factor> [<factor>]
// where a factor is an AgentType, an atom or an `(and ...)` group, and atoms are
// intervention, signal:legal|illegal|none, axis:<axis>:favored|disfavored.
// Throws ParseError carrying the line number.
FeatureSet parse_feature_spec(std::string_view text);

// Parses `text` and appends it to `base`. Name collisions are parse errors.
FeatureSet extend_feature_set(const FeatureSet& base, std::string_view text);

double feature_value(const FeatureDef& f, const Dilemma& d, Side side);

struct SideFeatures {
  std::vector<double> left;
  std::vector<double> right;
};

SideFeatures evaluate_features(const FeatureSet& fs, const Dilemma& d);

// Appends the products of every unordered pair (and triple when max_order is 3)
// of distinct base features, named `a*b` / `a*b*c`. Requires no products in fs.
FeatureSet expand_interactions(const FeatureSet& fs, int max_order);

// Drops features whose left-minus-right value is zero on every dilemma.
FeatureSet drop_constant_columns(const FeatureSet& fs, std::span<const Dilemma> dilemmas);

// The 22-feature baseline: one count per agent type, a swerve penalty and an
// illegal-crossing penalty.
std::string hybrid_feature_text();
FeatureSet hybrid_feature_set();

}  // namespace srm
