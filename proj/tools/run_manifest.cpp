#include "run_manifest.hpp"

#include <ctime>
#include <fstream>
#include <iterator>
#include <unistd.h>

#include "srm/checkpoint.hpp"
#include "srm/core.hpp"

namespace srm::cli {

namespace fs = std::filesystem;

namespace {

std::string file_digest(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return fnv1a_hex(bytes);
}

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunManifest::RunManifest(std::string subcommand)
    : subcommand_(std::move(subcommand)),
      started_(std::chrono::system_clock::now()),
      clock_start_(std::chrono::steady_clock::now()) {}

void RunManifest::add_input(const fs::path& p) {
  inputs_.push_back(p.string());
}

void RunManifest::add_output(const fs::path& display, const fs::path& actual) {
  outputs_.push_back({{"path", display.string()}, {"fnv1a", file_digest(actual)}});
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json body;
  body["tool"] = "srm";
  body["version"] = SRM_VERSION;
  body["subcommand"] = subcommand_;
  body["config"] = config_;
  body["seeds"] = seeds_;
  body["inputs"] = inputs_;
  body["outputs"] = outputs_;

  nlohmann::ordered_json j = body;
  j["content_hash"] = fnv1a_hex(body.dump());
  j["started_at"] = utc_timestamp(started_);
  j["duration_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start_).count();
  return j;
}

fs::path manifest_path_for(const fs::path& primary_output) {
  fs::path p = primary_output;
  p.replace_extension(".run.json");
  return p;
}

StagedOutputs::~StagedOutputs() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& [tmp, final_path] : staged_) fs::remove(tmp, ec);
}

fs::path StagedOutputs::stage(const fs::path& final_path) {
  fs::path tmp = final_path;
  tmp += ".tmp-" + std::to_string(::getpid());
  staged_.emplace_back(tmp, final_path);
  return tmp;
}

void StagedOutputs::commit(RunManifest& manifest, const fs::path& primary) {
  for (const auto& [tmp, final_path] : staged_) manifest.add_output(final_path, tmp);
  const fs::path mpath = manifest_path_for(primary);
  write_json_file(stage(mpath), manifest.to_json());
  for (const auto& [tmp, final_path] : staged_) fs::rename(tmp, final_path);
  committed_ = true;
}

}  // namespace srm::cli
