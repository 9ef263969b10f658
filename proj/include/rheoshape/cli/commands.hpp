#pragma once

#include <optional>
#include <string>

namespace rheoshape {

/// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitIo = 4,
  kExitVerification = 5,
};

struct CommonOptions {
  std::optional<std::string> out_dir;  // overrides config / env
  std::optional<int> threads;
};

int cmd_simulate(const std::string& config_path, const CommonOptions& opts);
int cmd_optimize(const std::string& config_path, const CommonOptions& opts, bool resume);
int cmd_hemolysis(const std::string& solution_dir, const std::string& config_path);
int cmd_verify(const std::string& suite, const std::string& report_path);
int cmd_export(const std::string& solution_dir, const std::string& config_path,
               const std::string& what);

}  // namespace rheoshape
