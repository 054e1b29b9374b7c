#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sentinel {

inline constexpr const char* kToolVersion = "1.0.0";

/// Runs one command line (program name excluded). Returns the exit code:
/// 0 clean, 1 error-severity lint findings or breaking diff, 2 usage,
/// configuration or I/O failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sentinel
