#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace alphatown::cli {

/// Exit statuses shared by every subcommand.
enum ExitCode : int {
  kSuccess = 0,
  kViolation = 1,  // verification failed or a budget ran out
  kInvalid = 2,
  kInternalFailure = 3,
};

/// Runs one command line (without the program name). Results go to `out`,
/// errors to `err` as {"error": {"kind", "message"}}.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace alphatown::cli
