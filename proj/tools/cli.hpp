#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dvc::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2 };

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on a validation error and 2 on an I/O or input-format error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dvc::cli
