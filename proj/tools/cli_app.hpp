#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace spectrade::cli {

enum class Command { negotiate, experiment, validate_config };

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kConfigError = 2,
  kInfeasible = 3,
  kIoError = 4,
};

struct RunManifest {
  Command command = Command::validate_config;
  std::filesystem::path config_path;
  std::optional<std::string> experiment_id;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> episodes;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> onsite_path;
  unsigned threads = 0;
};

// Executes a parsed manifest. Files are written only under output_dir.
int run(const RunManifest& manifest, std::ostream& out, std::ostream& err);

// Parses argv (CLI11) and runs.
int main_with_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spectrade::cli
