#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace zomd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

/// Flags shared by every command; set values override the config file.
struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::int64_t> trials;
  bool quiet = false;
};

// Each command reports errors on `err` and returns an exit code:
// 0 success, 1 runtime or verification failure, 2 configuration error.

/// Runs the configured experiment; writes trajectory CSV(s) and summary.json.
int cmd_run(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Writes bounds.json with every theoretical constant and the bound report per epsilon.
int cmd_bounds(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Checks the estimator bounds over a mu grid and probe points; 1 when any row fails.
int cmd_verify_estimator(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// One ensemble per value of `parameter` (only "mu"); a value may be the literal "mu_star".
int cmd_sweep(const CommandOptions& options, const std::string& parameter, const std::vector<std::string>& values,
              std::ostream& out, std::ostream& err);

/// Default estimator-verification grid.
inline const std::vector<double> kVerifyMuGrid = {0.01, 0.05, 0.1, 0.5, 1.0};

}  // namespace zomd::cli
