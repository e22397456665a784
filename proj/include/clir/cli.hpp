#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace clir {

/// Runs one subcommand. `args[0]` is the program name. Returns the process exit code.
int cli_dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace clir
