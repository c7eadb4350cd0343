#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pathcov {

/// Entry point of the `pathcov` tool; `args` excludes the program name. Primary output goes to `out` (or the
/// --out file), diagnostics and timings to `err`. Errors produce one line
/// `error <code>: <message>` on `err` and a nonzero status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace pathcov
