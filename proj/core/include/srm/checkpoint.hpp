#pragma once

#include <filesystem>
#include <initializer_list>
#include <string_view>

#include <nlohmann/json.hpp>

#include "srm/choice_model.hpp"
#include "srm/mlp.hpp"

namespace srm {

// {"kind":"choice","feature_hash":"...","features":"<spec text>","weights":[...]}
nlohmann::ordered_json choice_checkpoint(const ChoiceModel& m);
// {"kind":"mlp","feature_hash":"...","layer_sizes":[...],"output":"logistic|linear",
//  "output_scale":s,"output_offset":o,"axis_inputs":[...],"weights":[[...]],"biases":[[...]]}
// Layer weights are stored row-major (output unit by output unit).
nlohmann::ordered_json mlp_checkpoint(const Mlp& m);

// Throws ParseError on malformed or mismatched checkpoints.
ChoiceModel choice_from_checkpoint(const nlohmann::json& j);
Mlp mlp_from_checkpoint(const nlohmann::json& j);

// Hash identifying the network's input encoding.
std::string mlp_input_hash(const Mlp& m);

nlohmann::json read_json_file(const std::filesystem::path& path);
// Throws ConfigError unless `j` is an object whose keys all appear in `known`.
void require_known_keys(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                        std::string_view what);

void write_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j);

}  // namespace srm
