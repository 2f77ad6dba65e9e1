#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace srm::cli {

// Provenance record written beside a command's outputs. `content_hash` covers
// everything except the start time and duration, so reruns with the same
// inputs and seeds hash identically.
class RunManifest {
 public:
  explicit RunManifest(std::string subcommand);

  void set_config(nlohmann::ordered_json config) { config_ = std::move(config); }
  void add_seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
  void add_input(const std::filesystem::path& p);
  // Records the path and the content digest of an output file.
  void add_output(const std::filesystem::path& display, const std::filesystem::path& actual);

  nlohmann::ordered_json to_json() const;

 private:
  std::string subcommand_;
  nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
  std::map<std::string, std::uint64_t> seeds_;
  std::vector<std::string> inputs_;
  nlohmann::ordered_json outputs_ = nlohmann::ordered_json::array();
  std::chrono::system_clock::time_point started_;
  std::chrono::steady_clock::time_point clock_start_;
};

// "out/sweep.csv" -> "out/sweep.run.json"
std::filesystem::path manifest_path_for(const std::filesystem::path& primary_output);

// Output files are written to temporaries and renamed into place only on
// commit(), so a failing command leaves no partial outputs behind.
class StagedOutputs {
 public:
  StagedOutputs() = default;
  StagedOutputs(const StagedOutputs&) = delete;
  StagedOutputs& operator=(const StagedOutputs&) = delete;
  ~StagedOutputs();

  // Returns the temporary path to write instead of `final_path`.
  std::filesystem::path stage(const std::filesystem::path& final_path);
  // Adds every staged file to the manifest, stages the manifest itself next to
  // `primary`, then moves everything into place.
  void commit(RunManifest& manifest, const std::filesystem::path& primary);

 private:
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;  // temp, final
  bool committed_ = false;
};

}  // namespace srm::cli
