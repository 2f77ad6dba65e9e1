#include "srm/dataset_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "srm/error.hpp"

namespace srm {

namespace {

nlohmann::ordered_json counts_to_json(const AgentCounts& c) {
  nlohmann::ordered_json o = nlohmann::ordered_json::object();
  for (AgentType a : all_agent_types()) {
    if (c[index_of(a)] != 0) o[std::string(agent_name(a))] = c[index_of(a)];
  }
  return o;
}

AgentCounts counts_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("agent counts must be an object");
  AgentCounts c{};
  for (const auto& [key, value] : j.items()) {
    auto a = parse_agent_type(key);
    if (!a) throw ParseError("unknown agent type '" + key + "'");
    if (!value.is_number_integer() || value.get<int>() < 0) {
      throw ParseError("count for '" + key + "' must be a non-negative integer");
    }
    c[index_of(*a)] = value.get<int>();
  }
  return c;
}

}  // namespace

nlohmann::ordered_json dilemma_to_json(const Dilemma& d) {
  nlohmann::ordered_json o;
  o["id"] = d.id;
  o["left"] = counts_to_json(d.left);
  o["right"] = counts_to_json(d.right);
  o["signal_left"] = std::string(signal_name(d.signal_left));
  o["car_side"] = std::string(side_name(d.car_side));
  return o;
}

Dilemma dilemma_from_json(const nlohmann::json& j) {
  Dilemma d;
  try {
    d.id = j.at("id").get<std::string>();
    d.left = counts_from_json(j.at("left"));
    d.right = counts_from_json(j.at("right"));
    auto sig = parse_signal(j.at("signal_left").get<std::string>());
    if (!sig) throw ParseError("signal_left must be legal, illegal or none");
    auto car = parse_side(j.at("car_side").get<std::string>());
    if (!car) throw ParseError("car_side must be left or right");
    d.signal_left = *sig;
    d.car_side = *car;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
  return d;
}

nlohmann::ordered_json judgment_to_json(const AggregatedJudgment& j) {
  auto o = dilemma_to_json(j.dilemma);
  o["n"] = j.n;
  o["n_save_left"] = j.n_save_left;
  return o;
}

AggregatedJudgment judgment_from_json(const nlohmann::json& j) {
  AggregatedJudgment out;
  out.dilemma = dilemma_from_json(j);
  try {
    out.n = j.at("n").get<int>();
    out.n_save_left = j.at("n_save_left").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
  try {
    validate(out);
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
  return out;
}

void write_dataset(std::ostream& out, std::span<const AggregatedJudgment> data) {
  for (const auto& j : data) out << judgment_to_json(j).dump() << '\n';
}

void write_dataset(const std::filesystem::path& path, std::span<const AggregatedJudgment> data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_dataset(out, data);
}

std::vector<AggregatedJudgment> read_dataset(std::istream& in) {
  std::vector<AggregatedJudgment> data;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      data.push_back(judgment_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return data;
}

std::vector<AggregatedJudgment> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset '" + path.string() + "'");
  return read_dataset(in);
}

std::vector<RegressionPoint> read_regression_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::string line;
  std::vector<RegressionPoint> points;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line.rfind("x,y", 0) != 0) throw ParseError("expected header 'x,y'", 1);
      continue;
    }
    if (line.empty()) continue;
    std::istringstream ss(line);
    RegressionPoint p;
    char comma = 0;
    if (!(ss >> p.x >> comma >> p.y) || comma != ',') throw ParseError("malformed row", line_no);
    points.push_back(p);
  }
  return points;
}

void write_regression_csv(const std::filesystem::path& path, std::span<const RegressionPoint> points) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << "x,y\n" << std::setprecision(17);
  for (const auto& p : points) out << p.x << ',' << p.y << '\n';
}

}  // namespace srm
