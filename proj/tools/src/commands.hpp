#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace vlmp::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitIo = 4,
  kExitInvalidInput = 5,
  kExitUnknownMethod = 6,
  kExitNumerical = 7,
};

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "VLMP_OUTPUT_DIR";

/// Runs one command line (args[0] is the program name). Results go to files;
/// `out` receives a JSON summary of the written paths, `err` a JSON error
/// object on failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace vlmp::cli
