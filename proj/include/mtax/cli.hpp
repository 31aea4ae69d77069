#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mtax::cli {

/// Runs one subcommand. `args` excludes the program name.
/// Returns 0 on success, 1 on a data or validation error, 2 on a usage error.
int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace mtax::cli
