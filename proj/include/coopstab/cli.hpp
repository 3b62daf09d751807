#pragma once

#include <string>
#include <vector>

namespace coopstab {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitBlowUp = 3,
  kExitUsage = 64,
  kExitConfig = 65,
};

/// Entry point of the coopstab tool; argv[0] is the program name.
int run_cli(const std::vector<std::string>& argv);

}  // namespace coopstab
