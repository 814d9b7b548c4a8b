#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dualdiv {

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 on usage, configuration or data errors, 2 on runtime errors.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dualdiv
