#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ordreg::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 success, 1 usage or input error, 2 non-convergence.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ordreg::cli
