#ifndef TRACTDYN_TOOLS_COMMANDS_HPP
#define TRACTDYN_TOOLS_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace tractdyn::cli {

enum ExitCode : int {
    kSuccess = 0,
    kInternal = 1,
    kValidation = 2,
    kResourceCap = 3,
    kNumerical = 4,
};

/// Runs one command line; args excludes the program name. Reports go to the
/// --out file (written atomically) or to `out`; diagnostics go to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace tractdyn::cli

#endif
