#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssan::cli {

/// Runs the `ssan` command line. Returns the process exit status; usage and
/// diagnostics go to `err`, progress and results to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssan::cli
