#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "srm/core.hpp"

namespace srm {

struct ResidualRecord {
  std::string id;
  int n = 0;
  double p_data = 0.0;
  double p_model = 0.0;
  std::optional<double> p_reference;
  double raw = 0.0;                  // p_data - p_model
  std::optional<double> smoothed;    // p_reference - p_model

  bool operator==(const ResidualRecord&) const = default;
};

// Dilemmas with n >= min_n ranked by |raw| descending, ties by larger n then id.
// `p_reference` may be empty. top_k = 0 keeps every record.
std::vector<ResidualRecord> raw_residuals(std::span<const AggregatedJudgment> data,
                                          std::span<const double> p_model,
                                          std::span<const double> p_reference, int min_n,
                                          std::size_t top_k);

// All dilemmas ranked by |p_reference - p_model| descending, same tie-breaks.
std::vector<ResidualRecord> smoothed_residuals(std::span<const AggregatedJudgment> data,
                                               std::span<const double> p_model,
                                               std::span<const double> p_reference,
                                               std::size_t top_k);

// Pearson correlation of two aligned residual vectors.
double residual_correlation(std::span<const double> a, std::span<const double> b);

// Header `id,n,p_data,p_model,p_reference,raw,smoothed`; a missing reference is an empty field.
void write_residuals_csv(std::ostream& out, std::span<const ResidualRecord> records);
std::string residuals_csv(std::span<const ResidualRecord> records);

nlohmann::ordered_json to_json(const ResidualRecord& r);
ResidualRecord residual_record_from_json(const nlohmann::json& j);

}  // namespace srm
