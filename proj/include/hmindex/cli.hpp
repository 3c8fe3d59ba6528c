#pragma once

// Batch entry point: verification suites, certificates and flow series,
// written as JSON reports and CSV files.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hmindex {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Grids on S^4 are capped at this resolution to bound memory.
inline constexpr int kSphere4ResolutionCap = 20;

struct RunConfig {
  std::string command;
  std::string map = "identity3";
  int degree = 1;
  std::uint64_t seed = 42;
  int resolution = 32;
  int flow_resolution = 16;
  int samples = 21;
  double t_max = 1.0;
  double kappa = 1.0;
  int sphere = 0;  // 0 = every implemented sphere
  std::string output_path;
};

enum class CheckStatus { pass, fail, xfail, info };

struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  CheckStatus status = CheckStatus::pass;
  std::string note;
};

std::string status_name(CheckStatus status);

/// Throws std::invalid_argument for an invalid configuration.
void validate(const RunConfig& config);

/// Runs one command, writing reports under config.output_path and one line
/// per check to `log`. Returns 0 / 1 / 2 as documented for the CLI.
int run(const RunConfig& config, std::ostream& log);

/// Parses argv (subcommand + flags) and calls run().
int run_cli(int argc, char** argv);

}  // namespace hmindex
