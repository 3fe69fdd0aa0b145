#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace versecraft {

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 success, 1 usage error, 2 data or format error, 3 vocab
/// hash mismatch.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace versecraft
