#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fcaloha {

/// Entry point of the `fcaloha` tool. `args` excludes the program name.
/// Returns 0 on success, 2 on configuration errors and 1 on runtime failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fcaloha
