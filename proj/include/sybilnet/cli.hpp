#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sybilnet {

// Runs one subcommand. `args` excludes the program name. Returns the process
// exit status; diagnostics go to `err` as "error: <category> error: <message>".
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sybilnet
