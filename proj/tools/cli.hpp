#pragma once

#include <iosfwd>

namespace itmlab::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kComputationLimit = 3,
  kIoError = 4,
};

/// Full command-line entry point; `out` receives the JSON report, `err` diagnostics.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace itmlab::cli
