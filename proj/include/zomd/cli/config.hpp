#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "zomd/analysis.hpp"
#include "zomd/errors.hpp"
#include "zomd/solver.hpp"

namespace zomd::cli {

using Json = nlohmann::json;

/// Configuration error attributed to one member of the document.
class ConfigFieldError : public ConfigError {
 public:
  ConfigFieldError(std::string pointer, const std::string& message)
      : ConfigError(pointer + ": " + message), pointer_(std::move(pointer)), message_(message) {}
  const std::string& pointer() const { return pointer_; }
  const std::string& message() const { return message_; }

 private:
  std::string pointer_;
  std::string message_;
};

// Optional members stay optional so that writing a config back out reproduces
// exactly the keys that were read.

struct ObjectiveConfig {
  std::string kind;  // quadratic | abs_sum | log_sum_exp
  std::optional<std::vector<std::vector<double>>> Q;
  std::optional<std::vector<double>> c;
  std::optional<std::vector<double>> a;
  std::optional<double> scale;
  std::optional<std::string> smoothness_class;  // C00 | C11
};

struct NoiseConfig {
  std::string kind;  // none | additive_gaussian | biased
  std::optional<double> B;
  std::optional<double> sd;
  std::optional<double> V;
  std::optional<std::string> bias_field;  // sine | constant
};

struct SetConfig {
  std::string kind;  // box | ball | simplex
  std::optional<std::vector<double>> lo;
  std::optional<std::vector<double>> hi;
  std::optional<std::vector<double>> center;
  std::optional<double> radius;
};

struct GeometryConfig {
  std::string mirror_map;  // euclidean | negative_entropy
  std::optional<std::string> norm;  // primal norm: l1 | l2 | linf
  SetConfig set;
};

struct EstimatorConfig {
  double mu = 0.0;
};

struct ScheduleConfig {
  double a = 0.0;
  double p = 0.0;
  std::optional<std::int64_t> T_max;
};

struct RunConfig {
  std::int64_t T = 0;
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> master_seed;
  std::optional<std::vector<double>> x1;
  std::optional<unsigned> workers;
};

struct AnalysisConfig {
  std::optional<std::vector<double>> epsilon;
  std::optional<std::vector<double>> confidence;
  std::optional<std::string> delta_variant;          // sqrt_n | n
  std::optional<std::string> c_variant;              // k1_squared | k1_printed
  std::optional<std::string> second_moment_variant;  // standard | l1_printed | fourth_moment
  std::optional<int> curve_points;
  std::optional<std::int64_t> scan_cap;
  std::optional<std::vector<double>> verify_mu;
  std::optional<int> verify_points;
  std::optional<std::int64_t> verify_samples;
};

struct OutputConfig {
  std::optional<std::string> directory;
  std::optional<std::vector<std::string>> formats;  // csv, json
};

struct ExperimentConfig {
  int dimension = 0;
  ObjectiveConfig objective;
  NoiseConfig noise;
  GeometryConfig geometry;
  EstimatorConfig estimator;
  ScheduleConfig schedule;
  RunConfig run;
  AnalysisConfig analysis;
  OutputConfig output;
};

/// Typed view of a config document. Throws ConfigError naming the JSON pointer
/// of the offending member; schema only, no cross-field checks.
ExperimentConfig parse_config(const Json& doc);

Json to_json(const ExperimentConfig& config);

/// Library objects described by a config.
struct Built {
  Experiment experiment;
  TheoryOptions theory;
  std::int64_t trials = 1;
  std::uint64_t master_seed = 0;
  unsigned workers = 0;
  std::vector<double> epsilons;
  std::vector<double> confidences;
  int curve_points = 20;
  std::int64_t scan_cap = kDefaultScanCap;
};

/// Cross-field validation and construction; `mu` overrides the estimator radius.
/// Throws ConfigError prefixed by the JSON pointer of the offending member.
Built build(const ExperimentConfig& config, std::optional<double> mu = std::nullopt);

/// Reads, parses and builds, reporting errors as "<path>:<line>: message".
ExperimentConfig load_config(const std::filesystem::path& path);

/// As load_config, from in-memory text; `source` labels messages.
ExperimentConfig load_config_text(const std::string& text, const std::string& source = "<config>");

}  // namespace zomd::cli
