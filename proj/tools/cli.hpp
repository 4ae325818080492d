#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mmviad::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kDataError = 2;
inline constexpr int kInternalError = 3;

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmviad::cli
