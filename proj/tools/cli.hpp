#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace psdsos::cli {

enum ExitCode : int { ok = 0, usage = 1, not_converged = 2, precondition = 3 };

/// Runs one command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace psdsos::cli
