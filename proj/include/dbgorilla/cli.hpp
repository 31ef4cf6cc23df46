#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dbgorilla::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kProviderError = 3 };

// Entry point behind the dbgorilla binary. `args` excludes the program name.
// Never throws; every failure maps onto an exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// File-name friendly form of a model name.
std::string model_slug(const std::string& model);

}  // namespace dbgorilla::cli
