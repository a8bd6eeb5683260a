#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cst {

// Runs one CLI invocation; `args` excludes the program name. Human tables go
// to `out` (or the --out path); diagnostics are a single line on `err`.
// Exit codes: 0 success, 2 usage, 3 data error, 4 numeric infeasibility.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

} // namespace cst
