#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace srm::cli {

// Bad arguments detected after parsing; exits with the usage status.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DemoPolyOptions {
  std::vector<std::size_t> sizes = {100, 1000, 10000, 100000};
  int sims = 10;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  std::optional<std::filesystem::path> config;
};

struct GenOptions {
  std::filesystem::path config;
  std::filesystem::path truth;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

struct FitOptions {
  std::string model = "hybrid";
  std::optional<std::filesystem::path> features;
  std::filesystem::path data;
  std::uint64_t split_seed = 0;
  std::filesystem::path out;
  std::optional<std::filesystem::path> metrics;
  std::optional<std::filesystem::path> config;
  double validation_fraction = 0.1;
  int calibration_min_n = 100;
};

struct ResidualsOptions {
  std::string kind = "raw";
  std::filesystem::path model;
  std::optional<std::filesystem::path> reference;
  std::filesystem::path data;
  int min_n = 100;
  std::size_t top = 5;
  std::string format = "csv";
  std::optional<std::filesystem::path> out;
};

struct InitOptions {
  std::filesystem::path session;
  std::filesystem::path data;
  std::optional<std::filesystem::path> features;
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
};

struct IterateOptions {
  std::filesystem::path session;
  std::optional<std::filesystem::path> features;
  std::optional<std::string> text;
  bool retrain_reference = false;
};

struct StatusOptions {
  std::filesystem::path session;
  bool json = false;
};

struct ReplayOptions {
  std::filesystem::path session;
  std::optional<std::filesystem::path> out;
};

struct BayesSelectOptions {
  std::optional<std::filesystem::path> features;
  std::filesystem::path data;
  int order = 3;
  std::uint64_t split_seed = 0;
  std::filesystem::path out;
  std::optional<std::filesystem::path> config;
};

struct ChisqOptions {
  long k1 = 0, n1 = 0, k2 = 0, n2 = 0;
  bool yates = false;
};

struct ServeOptions {
  int port = 8080;
  std::filesystem::path session;
  std::optional<std::filesystem::path> static_dir;
};

// Each command returns its exit status; `echo` is the parsed command line
// recorded in the run manifest.
int run_demo_poly(const DemoPolyOptions& o, const nlohmann::ordered_json& echo);
int run_gen(const GenOptions& o, const nlohmann::ordered_json& echo);
int run_fit(const FitOptions& o, const nlohmann::ordered_json& echo);
int run_residuals(const ResidualsOptions& o, const nlohmann::ordered_json& echo);
int run_init(const InitOptions& o, const nlohmann::ordered_json& echo);
int run_iterate(const IterateOptions& o, const nlohmann::ordered_json& echo);
int run_status(const StatusOptions& o);
int run_replay(const ReplayOptions& o, const nlohmann::ordered_json& echo);
int run_bayes_select(const BayesSelectOptions& o, const nlohmann::ordered_json& echo);
int run_chisq(const ChisqOptions& o);
int run_serve(const ServeOptions& o);

}  // namespace srm::cli
