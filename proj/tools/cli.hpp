#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace evosig {

/// Command-line entry point. Exit status 0 on success, 1 when the command
/// fails, 2 for usage errors. Failures print one line to `err`:
/// `error <kind>: <message>`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace evosig
