#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srm/core.hpp"

namespace srm {

// One JSON object per line:
// {"id":"...","left":{"Girl":1},"right":{...},"signal_left":"legal|illegal|none",
//  "car_side":"left|right","n":649,"n_save_left":4}
// Agents with zero count are omitted on output and default to zero on input.
nlohmann::ordered_json judgment_to_json(const AggregatedJudgment& j);
AggregatedJudgment judgment_from_json(const nlohmann::json& j);

nlohmann::ordered_json dilemma_to_json(const Dilemma& d);
Dilemma dilemma_from_json(const nlohmann::json& j);

void write_dataset(std::ostream& out, std::span<const AggregatedJudgment> data);
void write_dataset(const std::filesystem::path& path, std::span<const AggregatedJudgment> data);

// Throws ParseError with the offending line number. Blank lines are skipped.
std::vector<AggregatedJudgment> read_dataset(std::istream& in);
std::vector<AggregatedJudgment> read_dataset(const std::filesystem::path& path);

std::vector<RegressionPoint> read_regression_csv(const std::filesystem::path& path);
void write_regression_csv(const std::filesystem::path& path, std::span<const RegressionPoint> points);

}  // namespace srm
