#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace aqcast {

// Entry point of the `aqcast` tool. args excludes the program name. Returns the exit
// code: 0 success, 1 data error, 2 config or usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace aqcast
