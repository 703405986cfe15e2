#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cmcqa {

// Entry point of the conformal-mcqa tool. `args` excludes the program name.
// Returns the process exit code (see ExitCode).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cmcqa
