#include "srm/checkpoint.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "srm/error.hpp"

namespace srm {

nlohmann::ordered_json choice_checkpoint(const ChoiceModel& m) {
  nlohmann::ordered_json j;
  j["kind"] = "choice";
  j["feature_hash"] = m.feature_set().hash();
  j["features"] = m.feature_set().to_text();
  j["feature_names"] = m.feature_set().names();
  j["weights"] = std::vector<double>(m.weights().begin(), m.weights().end());
  return j;
}

ChoiceModel choice_from_checkpoint(const nlohmann::json& j) {
  try {
    if (j.at("kind") != "choice") throw ParseError("checkpoint is not a choice model");
    FeatureSet fs = parse_feature_spec(j.at("features").get<std::string>());
    if (j.contains("feature_hash") && j.at("feature_hash").get<std::string>() != fs.hash()) {
      throw ParseError("feature_hash does not match the stored features");
    }
    const auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != fs.size()) throw ParseError("weight count does not match feature count");
    return ChoiceModel(std::move(fs), Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("choice checkpoint: ") + e.what());
  }
}

std::string mlp_input_hash(const Mlp& m) {
  std::string key = "encoding42";
  for (const auto& a : m.axis_inputs) key += "+" + a;
  return fnv1a_hex(key);
}

nlohmann::ordered_json mlp_checkpoint(const Mlp& m) {
  nlohmann::ordered_json j;
  j["kind"] = "mlp";
  j["feature_hash"] = mlp_input_hash(m);
  j["layer_sizes"] = m.layer_sizes();
  j["output"] = m.output_activation() == OutputActivation::Logistic ? "logistic" : "linear";
  j["output_scale"] = m.output_scale;
  j["output_offset"] = m.output_offset;
  j["axis_inputs"] = m.axis_inputs;
  auto weights = nlohmann::ordered_json::array();
  auto biases = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < m.num_layers(); ++l) {
    const Eigen::MatrixXd& w = m.weights()[l];
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    weights.push_back(flat);
    biases.push_back(std::vector<double>(m.biases()[l].begin(), m.biases()[l].end()));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  return j;
}

Mlp mlp_from_checkpoint(const nlohmann::json& j) {
  try {
    if (j.at("kind") != "mlp") throw ParseError("checkpoint is not an MLP");
    const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
    const std::string out = j.at("output").get<std::string>();
    if (out != "logistic" && out != "linear") throw ParseError("unknown output activation");
    Mlp m(sizes, out == "logistic" ? OutputActivation::Logistic : OutputActivation::Linear, 0);
    m.output_scale = j.at("output_scale").get<double>();
    m.output_offset = j.at("output_offset").get<double>();
    m.axis_inputs = j.value("axis_inputs", std::vector<std::string>{});
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() != m.num_layers() || biases.size() != m.num_layers()) {
      throw ParseError("layer count does not match layer_sizes");
    }
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
      const auto w = weights[l].get<std::vector<double>>();
      const auto b = biases[l].get<std::vector<double>>();
      Eigen::MatrixXd& wm = m.weights()[l];
      if (w.size() != static_cast<std::size_t>(wm.size()) ||
          b.size() != static_cast<std::size_t>(m.biases()[l].size())) {
        throw ParseError("layer " + std::to_string(l) + " has the wrong number of parameters");
      }
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < wm.rows(); ++r) {
        for (Eigen::Index c = 0; c < wm.cols(); ++c) wm(r, c) = w[k++];
      }
      for (std::size_t i = 0; i < b.size(); ++i) m.biases()[l][static_cast<Eigen::Index>(i)] = b[i];
    }
    if (!m.parameters().allFinite()) throw ParseError("non-finite network parameter");
    if (j.contains("feature_hash") && j.at("feature_hash").get<std::string>() != mlp_input_hash(m)) {
      throw ParseError("feature_hash does not match the network's axis inputs");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("mlp checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("mlp checkpoint: ") + e.what());
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void require_known_keys(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                        std::string_view what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(std::string(what) + ": unknown key '" + key + "'");
    }
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

}  // namespace srm
