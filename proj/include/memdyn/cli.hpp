#pragma once

// Command-line front end: memdyn <simulate|certify|measure|telegraph|memory>
//   --config <file.json> --out <path> [--seed N] [--threads N] [--quiet]
//
// Exit codes: 0 success, 1 configuration or validation error, 2 certificate
// failed or inequality falsified, 3 numerical failure.

#include <string>
#include <vector>

namespace memdyn::cli {

enum ExitCode : int { kOk = 0, kConfig = 1, kFailed = 2, kNumerical = 3 };

int run(int argc, const char* const* argv);

/// Same as above with the program name omitted.
int run(const std::vector<std::string>& args);

}  // namespace memdyn::cli
