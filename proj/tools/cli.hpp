#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace blowup::cli {

/// Runs the command line `args` (without the program name). Exit codes: 0
/// success, 1 numerical failure (error JSON on `out`), 2 argument error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace blowup::cli
