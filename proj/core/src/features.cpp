#include "srm/features.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>

#include "srm/error.hpp"

namespace srm {

namespace {

using enum AgentType;

std::vector<AgentType> humans() {
  std::vector<AgentType> h;
  for (AgentType a : all_agent_types()) {
    if (a != Dog && a != Cat) h.push_back(a);
  }
  return h;
}

std::vector<AgentType> humans_except(std::initializer_list<AgentType> excluded) {
  auto h = humans();
  std::erase_if(h, [&](AgentType a) {
    return std::find(excluded.begin(), excluded.end(), a) != excluded.end();
  });
  return h;
}

bool within(const AgentCounts& residual, const std::vector<AgentType>& category) {
  bool any = false;
  for (std::size_t i = 0; i < kNumAgentTypes; ++i) {
    if (residual[i] == 0) continue;
    any = true;
    if (std::find(category.begin(), category.end(), static_cast<AgentType>(i)) ==
        category.end()) {
      return false;
    }
  }
  return any;
}

}  // namespace

const std::vector<Axis>& axis_catalog() {
  static const std::vector<Axis> kCatalog = [] {
    const std::vector<AgentType> young = {Boy, Girl, Stroller};
    const std::vector<AgentType> old = {OldMan, OldWoman};
    const std::vector<AgentType> adult = {Man, Woman};
    const std::vector<AgentType> doctors = {MaleDoctor, FemaleDoctor};
    return std::vector<Axis>{
        {"humans_vs_animals", humans(), {Dog, Cat}},
        {"young_vs_old", young, old},
        {"more_vs_less", {}, {}, true},
        {"male_vs_female",
         {Man, OldMan, Boy, LargeMan, MaleExecutive, MaleAthlete, MaleDoctor},
         {Woman, OldWoman, Girl, LargeWoman, FemaleExecutive, FemaleAthlete, FemaleDoctor,
          Pregnant}},
        {"fat_vs_fit", {LargeMan, LargeWoman}, {MaleAthlete, FemaleAthlete}},
        {"high_vs_low_status", {MaleExecutive, FemaleExecutive, MaleDoctor, FemaleDoctor},
         {Homeless, Criminal}},
        {"young_vs_adult", young, adult},
        {"adult_vs_old", adult, old},
        {"young_vs_old_strict", {Boy, Girl}, old},
        {"pregnant_vs_other", {Pregnant}, humans_except({Pregnant})},
        {"doctors_vs_other", doctors, humans_except({MaleDoctor, FemaleDoctor})},
        {"criminals_vs_animals", {Criminal}, {Dog, Cat}},
    };
  }();
  return kCatalog;
}

const Axis& find_axis(std::string_view name) {
  for (const auto& axis : axis_catalog()) {
    if (axis.name == name) return axis;
  }
  throw ConfigError("unknown axis '" + std::string(name) + "'");
}

std::optional<Side> classify_axis(const Dilemma& d, const Axis& axis) {
  AgentCounts l{}, r{};
  for (std::size_t i = 0; i < kNumAgentTypes; ++i) {
    const int common = std::min(d.left[i], d.right[i]);
    l[i] = d.left[i] - common;
    r[i] = d.right[i] - common;
  }
  const bool l_empty = total(l) == 0;
  const bool r_empty = total(r) == 0;
  if (axis.count_contrast) {
    if (!l_empty && r_empty) return Side::Left;
    if (l_empty && !r_empty) return Side::Right;
    return std::nullopt;
  }
  if (within(l, axis.favored) && within(r, axis.disfavored)) return Side::Left;
  if (within(r, axis.favored) && within(l, axis.disfavored)) return Side::Right;
  return std::nullopt;
}

std::optional<Side> classify_axis(const Dilemma& d, std::string_view axis) {
  return classify_axis(d, find_axis(axis));
}

std::string Atom::to_string() const {
  switch (kind) {
    case AtomKind::Intervention:
      return "intervention";
    case AtomKind::SignalLegal:
      return "signal:legal";
    case AtomKind::SignalIllegal:
      return "signal:illegal";
    case AtomKind::SignalNone:
      return "signal:none";
    case AtomKind::AxisFavored:
      return "axis:" + axis + ":favored";
    case AtomKind::AxisDisfavored:
      return "axis:" + axis + ":disfavored";
  }
  return {};
}

bool requires_intervention(const Dilemma& d, Side side) { return d.car_side == opposite(side); }

bool holds(const Atom& atom, const Dilemma& d, Side side) {
  switch (atom.kind) {
    case AtomKind::Intervention:
      return requires_intervention(d, side);
    case AtomKind::SignalLegal:
      return d.signal(side) == Signal::Legal;
    case AtomKind::SignalIllegal:
      return d.signal(side) == Signal::Illegal;
    case AtomKind::SignalNone:
      return d.signal(side) == Signal::None;
    case AtomKind::AxisFavored:
      return classify_axis(d, atom.axis) == side;
    case AtomKind::AxisDisfavored:
      return classify_axis(d, atom.axis) == opposite(side);
  }
  return false;
}

namespace {

std::string conjunction_text(const std::vector<Atom>& atoms) {
  if (atoms.size() == 1) return atoms.front().to_string();
  std::string s = "(and";
  for (const auto& a : atoms) s += " " + a.to_string();
  return s + ")";
}

std::string factor_text(const FeatureDef& f) {
  if (f.kind == FeatureDef::Kind::Count) return std::string(agent_name(f.agent));
  return conjunction_text(f.conjunction);
}

}  // namespace

FeatureDef FeatureDef::count(AgentType a) {
  FeatureDef f;
  f.kind = Kind::Count;
  f.name = std::string(agent_name(a));
  f.agent = a;
  return f;
}

FeatureDef FeatureDef::indicator(std::string name, std::vector<Atom> atoms) {
  FeatureDef f;
  f.kind = Kind::Indicator;
  f.name = std::move(name);
  f.conjunction = std::move(atoms);
  return f;
}

FeatureDef FeatureDef::product(std::span<const FeatureDef> factors) {
  FeatureDef f;
  f.kind = Kind::Product;
  for (const auto& factor : factors) {
    if (!f.name.empty()) f.name += "*";
    f.name += factor.name;
    // Factor names are canonical so that text round-trips compare equal.
    FeatureDef canonical = factor;
    canonical.name = factor_text(factor);
    f.factors.push_back(std::move(canonical));
  }
  return f;
}

void FeatureSet::add(FeatureDef def) {
  if (find(def.name)) throw ConfigError("duplicate feature name '" + def.name + "'");
  defs_.push_back(std::move(def));
}

std::optional<std::size_t> FeatureSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < defs_.size(); ++i) {
    if (defs_[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::string> FeatureSet::names() const {
  std::vector<std::string> out;
  out.reserve(defs_.size());
  for (const auto& d : defs_) out.push_back(d.name);
  return out;
}

std::string FeatureSet::to_text() const {
  std::string out;
  for (const auto& f : defs_) {
    switch (f.kind) {
      case FeatureDef::Kind::Count:
        out += "count " + f.name;
        break;
      case FeatureDef::Kind::Indicator:
        out += "indicator " + f.name + " " + conjunction_text(f.conjunction);
        break;
      case FeatureDef::Kind::Product:
        out += "product " + f.name;
        for (const auto& factor : f.factors) out += " " + factor_text(factor);
        break;
    }
    out += '\n';
  }
  return out;
}

std::string FeatureSet::hash() const {
  return fnv1a_hex(to_text());
}

FeatureSet FeatureSet::subset(std::span<const std::size_t> keep) const {
  FeatureSet out;
  for (std::size_t i : keep) out.add(defs_.at(i));
  return out;
}

namespace {

class LineParser {
 public:
  LineParser(std::string_view line, int line_no) : line_no_(line_no) {
    std::string cur;
    for (char c : line) {
      if (c == '(' || c == ')' || c == ' ' || c == '\t' || c == '\r') {
        if (!cur.empty()) tokens_.push_back(std::move(cur));
        cur.clear();
        if (c == '(' || c == ')') tokens_.emplace_back(1, c);
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) tokens_.push_back(std::move(cur));
  }

  bool done() const { return pos_ >= tokens_.size(); }
  std::size_t remaining() const { return tokens_.size() - pos_; }

  const std::string& next(std::string_view what) {
    if (done()) fail("expected " + std::string(what));
    return tokens_[pos_++];
  }
  const std::string& peek() const { return tokens_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_no_); }

  Atom atom(const std::string& tok) const {
    if (tok == "intervention") return {AtomKind::Intervention, {}};
    if (tok == "signal:legal") return {AtomKind::SignalLegal, {}};
    if (tok == "signal:illegal") return {AtomKind::SignalIllegal, {}};
    if (tok == "signal:none") return {AtomKind::SignalNone, {}};
    if (tok.rfind("axis:", 0) == 0) {
      const auto second = tok.find(':', 5);
      if (second != std::string::npos) {
        std::string axis = tok.substr(5, second - 5);
        std::string role = tok.substr(second + 1);
        bool known = std::any_of(axis_catalog().begin(), axis_catalog().end(),
                                 [&](const Axis& a) { return a.name == axis; });
        if (!known) fail("unknown axis '" + axis + "' in atom '" + tok + "'");
        if (role == "favored") return {AtomKind::AxisFavored, axis};
        if (role == "disfavored") return {AtomKind::AxisDisfavored, axis};
      }
    }
    fail("unknown atom '" + tok + "'");
  }

  // predicate := atom | ( and predicate predicate [predicate] ), flattened.
  void predicate(std::vector<Atom>& out, int depth) {
    const std::string& tok = next("predicate");
    if (tok == ")") fail("unexpected ')'");
    if (tok != "(") {
      out.push_back(atom(tok));
      return;
    }
    if (next("'and'") != "and") fail("only 'and' conjunctions are supported");
    int arity = 0;
    while (!done() && peek() != ")") {
      predicate(out, depth + 1);
      ++arity;
    }
    if (done()) fail("missing ')'");
    ++pos_;
    if (arity < 2) fail("'and' needs at least two operands");
    if (out.size() > kMaxConjunction) {
      fail("conjunction nests more than " + std::to_string(kMaxConjunction) + " atoms");
    }
  }

  FeatureDef factor() {
    if (!done() && peek() != "(") {
      if (auto a = parse_agent_type(peek())) {
        ++pos_;
        return FeatureDef::count(*a);
      }
    }
    std::vector<Atom> atoms;
    predicate(atoms, 0);
    auto def = FeatureDef::indicator({}, atoms);
    def.name = conjunction_text(atoms);
    return def;
  }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
  int line_no_;
};

void parse_into(FeatureSet& fs, std::string_view text) {
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    LineParser p(line, line_no);
    if (p.done()) continue;
    const std::string keyword = p.next("keyword");
    FeatureDef def;
    if (keyword == "count") {
      const std::string& name = p.next("agent type");
      auto agent = parse_agent_type(name);
      if (!agent) p.fail("unknown agent type '" + name + "'");
      def = FeatureDef::count(*agent);
    } else if (keyword == "indicator") {
      std::string name = p.next("feature name");
      if (name == "(" || name == ")") p.fail("expected feature name");
      std::vector<Atom> atoms;
      p.predicate(atoms, 0);
      def = FeatureDef::indicator(std::move(name), std::move(atoms));
    } else if (keyword == "product") {
      std::string name = p.next("feature name");
      std::vector<FeatureDef> factors;
      while (!p.done()) factors.push_back(p.factor());
      if (factors.size() < 2 || factors.size() > 3) p.fail("product needs two or three factors");
      def = FeatureDef::product(factors);
      def.name = std::move(name);
    } else {
      p.fail("unknown keyword '" + keyword + "'");
    }
    if (!p.done()) p.fail("unexpected trailing token '" + p.next("") + "'");
    if (fs.find(def.name)) p.fail("duplicate feature name '" + def.name + "'");
    fs.add(std::move(def));
  }
}

}  // namespace

FeatureSet parse_feature_spec(std::string_view text) {
  FeatureSet fs;
  parse_into(fs, text);
  return fs;
}

FeatureSet extend_feature_set(const FeatureSet& base, std::string_view text) {
  FeatureSet fs = base;
  parse_into(fs, text);
  return fs;
}

double feature_value(const FeatureDef& f, const Dilemma& d, Side side) {
  switch (f.kind) {
    case FeatureDef::Kind::Count:
      return d.count(side, f.agent);
    case FeatureDef::Kind::Indicator:
      for (const auto& atom : f.conjunction) {
        if (!holds(atom, d, side)) return 0.0;
      }
      return 1.0;
    case FeatureDef::Kind::Product: {
      double v = 1.0;
      for (const auto& factor : f.factors) v *= feature_value(factor, d, side);
      return v;
    }
  }
  return 0.0;
}

SideFeatures evaluate_features(const FeatureSet& fs, const Dilemma& d) {
  SideFeatures out;
  out.left.reserve(fs.size());
  out.right.reserve(fs.size());
  for (const auto& f : fs) {
    out.left.push_back(feature_value(f, d, Side::Left));
    out.right.push_back(feature_value(f, d, Side::Right));
  }
  return out;
}

FeatureSet expand_interactions(const FeatureSet& fs, int max_order) {
  if (max_order < 1 || max_order > 3) throw ConfigError("interaction order must be 1, 2 or 3");
  for (const auto& f : fs) {
    if (f.kind == FeatureDef::Kind::Product) {
      throw ConfigError("expand_interactions expects base features only, found '" + f.name + "'");
    }
  }
  FeatureSet out = fs;
  const std::size_t k = fs.size();
  if (max_order >= 2) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        const FeatureDef pair[] = {fs[i], fs[j]};
        out.add(FeatureDef::product(pair));
      }
    }
  }
  if (max_order >= 3) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        for (std::size_t l = j + 1; l < k; ++l) {
          const FeatureDef triple[] = {fs[i], fs[j], fs[l]};
          out.add(FeatureDef::product(triple));
        }
      }
    }
  }
  return out;
}

FeatureSet drop_constant_columns(const FeatureSet& fs, std::span<const Dilemma> dilemmas) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const bool varies = std::any_of(dilemmas.begin(), dilemmas.end(), [&](const Dilemma& d) {
      return feature_value(fs[i], d, Side::Left) != feature_value(fs[i], d, Side::Right);
    });
    if (varies) keep.push_back(i);
  }
  return fs.subset(keep);
}

std::string hybrid_feature_text() {
  std::string text;
  for (AgentType a : all_agent_types()) text += "count " + std::string(agent_name(a)) + "\n";
  text += "indicator swerve_penalty intervention\n";
  text += "indicator illegal signal:illegal\n";
  return text;
}

FeatureSet hybrid_feature_set() { return parse_feature_spec(hybrid_feature_text()); }

}  // namespace srm
