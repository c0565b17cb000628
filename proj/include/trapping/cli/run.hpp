#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trapping/cli/config.hpp"

namespace trapping::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kBudget = 3, kNumerical = 4 };

/// Overrides the output directory when set and no explicit directory is given.
inline constexpr const char* kOutputDirEnv = "TRAPPING_OUTPUT_DIR";

struct RunOptions {
  std::optional<std::uint64_t> seed;  ///< replaces cfg.seed before hashing
  std::optional<unsigned> threads;    ///< 0 or unset: available parallelism
  std::optional<std::string> output_dir;
  bool quiet = false;  ///< suppresses progress lines on the error stream
};

struct RunResult {
  int exit_code = kOk;
  std::vector<std::filesystem::path> outputs;  ///< artifacts, manifest excluded
  std::filesystem::path manifest;              ///< empty when validation failed
  std::string message;
};

/// Executes one operation. Artifacts are named <operation>-<hash>.<ext>; every
/// artifact carries the config hash and master seed, and a manifest is written
/// even when the run fails after validation.
RunResult run(ExperimentConfig cfg, const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Parses, prints every diagnostic and exits 2 on any, otherwise runs.
RunResult run_json(const Json& config, const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Reruns the config echoed in a manifest, with its thread count unless
/// overridden.
RunResult run_manifest(const std::filesystem::path& manifest, RunOptions opts, std::ostream& out,
                       std::ostream& err);

/// Prints one diagnostic per line. Returns 0 when there are none, else 2.
int validate_json(const Json& config, std::ostream& out);

/// Throws InvalidArgument when the file is unreadable or not JSON.
Json load_json_file(const std::filesystem::path& path);

}  // namespace trapping::cli
