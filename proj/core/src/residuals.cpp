#include "srm/residuals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "srm/error.hpp"
#include "srm/stats.hpp"

namespace srm {

namespace {

ResidualRecord make_record(const AggregatedJudgment& j, double p_model,
                           std::optional<double> p_reference) {
  ResidualRecord r;
  r.id = j.dilemma.id;
  r.n = j.n;
  r.p_data = j.p_data();
  r.p_model = p_model;
  r.p_reference = p_reference;
  r.raw = r.p_data - p_model;
  if (p_reference) r.smoothed = *p_reference - p_model;
  return r;
}

template <typename Key>
void rank(std::vector<ResidualRecord>& records, Key key, std::size_t top_k) {
  std::sort(records.begin(), records.end(), [&](const ResidualRecord& a, const ResidualRecord& b) {
    const double ka = std::abs(key(a));
    const double kb = std::abs(key(b));
    if (ka != kb) return ka > kb;
    if (a.n != b.n) return a.n > b.n;
    return a.id < b.id;
  });
  if (top_k > 0 && records.size() > top_k) records.resize(top_k);
}

void check(std::span<const AggregatedJudgment> data, std::span<const double> p_model,
           std::span<const double> p_reference) {
  if (p_model.size() != data.size() || (!p_reference.empty() && p_reference.size() != data.size())) {
    throw ConfigError("predictions are not aligned with the data");
  }
}

}  // namespace

std::vector<ResidualRecord> raw_residuals(std::span<const AggregatedJudgment> data,
                                          std::span<const double> p_model,
                                          std::span<const double> p_reference, int min_n,
                                          std::size_t top_k) {
  check(data, p_model, p_reference);
  std::vector<ResidualRecord> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].n < min_n) continue;
    out.push_back(make_record(data[i], p_model[i],
                              p_reference.empty() ? std::nullopt : std::optional(p_reference[i])));
  }
  rank(out, [](const ResidualRecord& r) { return r.raw; }, top_k);
  return out;
}

std::vector<ResidualRecord> smoothed_residuals(std::span<const AggregatedJudgment> data,
                                               std::span<const double> p_model,
                                               std::span<const double> p_reference,
                                               std::size_t top_k) {
  if (p_reference.size() != data.size()) throw ConfigError("smoothed residuals need a reference");
  check(data, p_model, p_reference);
  std::vector<ResidualRecord> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.push_back(make_record(data[i], p_model[i], p_reference[i]));
  }
  rank(out, [](const ResidualRecord& r) { return *r.smoothed; }, top_k);
  return out;
}

double residual_correlation(std::span<const double> a, std::span<const double> b) {
  return pearson(a, b);
}

void write_residuals_csv(std::ostream& out, std::span<const ResidualRecord> records) {
  out << "id,n,p_data,p_model,p_reference,raw,smoothed\n";
  for (const auto& r : records) {
    out << r.id << ',' << r.n << ',';
    auto num = [&](double v) {
      std::ostringstream s;
      s.precision(17);
      s << v;
      out << s.str();
    };
    num(r.p_data);
    out << ',';
    num(r.p_model);
    out << ',';
    if (r.p_reference) num(*r.p_reference);
    out << ',';
    num(r.raw);
    out << ',';
    if (r.smoothed) num(*r.smoothed);
    out << '\n';
  }
}

std::string residuals_csv(std::span<const ResidualRecord> records) {
  std::ostringstream s;
  write_residuals_csv(s, records);
  return s.str();
}

nlohmann::ordered_json to_json(const ResidualRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["n"] = r.n;
  j["p_data"] = r.p_data;
  j["p_model"] = r.p_model;
  j["p_reference"] = r.p_reference ? nlohmann::ordered_json(*r.p_reference) : nlohmann::ordered_json(nullptr);
  j["raw"] = r.raw;
  j["smoothed"] = r.smoothed ? nlohmann::ordered_json(*r.smoothed) : nlohmann::ordered_json(nullptr);
  return j;
}

ResidualRecord residual_record_from_json(const nlohmann::json& j) {
  ResidualRecord r;
  r.id = j.at("id").get<std::string>();
  r.n = j.at("n").get<int>();
  r.p_data = j.at("p_data").get<double>();
  r.p_model = j.at("p_model").get<double>();
  if (!j.at("p_reference").is_null()) r.p_reference = j.at("p_reference").get<double>();
  r.raw = j.at("raw").get<double>();
  if (!j.at("smoothed").is_null()) r.smoothed = j.at("smoothed").get<double>();
  return r;
}

}  // namespace srm
